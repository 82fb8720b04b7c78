//! Shared oracles for the integration suites: adaptive quadrature for the
//! special functions and densities, KS critical values, and corpus fixture
//! helpers. Everything here is independent of the library's evaluation
//! paths: plain Simpson refinement against the defining integrals.
#![allow(dead_code)]

use citedist::corpus::{ArticleRecord, CitationTable, Classification};
use citedist::distributions::ModelSpec;

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Quadrature oracle for the upper incomplete gamma: the integral of
/// t^(s-1) e^(-t) over [z, inf), computed on the log axis where the
/// integrand is smooth, with the tail cut where it underflows.
pub fn gamma_upper_oracle(s: f64, z: f64) -> f64 {
    let integrand = |u: f64| (s * u - u.exp()).exp();
    let lo = z.ln();
    // Beyond u = ln(800) the factor e^(-e^u) kills everything for |s|<=10.
    let hi = 800.0_f64.ln();
    if lo >= hi {
        return 0.0;
    }
    // Two passes: a rough magnitude, then a tight absolute tolerance.
    let rough = adaptive_simpson(&integrand, lo, hi, 1e-6, 30).abs();
    adaptive_simpson(&integrand, lo, hi, (rough * 1e-13).max(1e-300), 48)
}

/// Quadrature oracle for erfc via its defining integral.
pub fn erfc_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc_oracle(-x);
    }
    let integrand = |u: f64| (-(x + u) * (x + u)).exp();
    let hi = (745.0_f64).sqrt() - x + 1.0;
    if hi <= 0.0 {
        return 0.0;
    }
    let rough = adaptive_simpson(&integrand, 0.0, hi, 1e-8, 30).abs();
    std::f64::consts::FRAC_2_SQRT_PI * adaptive_simpson(&integrand, 0.0, hi, (rough * 1e-14).max(1e-300), 48)
}

/// Quadrature of a model density over its support, on the log axis. Equals
/// 1 for a correctly normalized density.
pub fn pdf_mass_oracle(spec: &ModelSpec) -> f64 {
    let x_min = spec.x_min();
    let integrand = |v: f64| {
        let x = x_min * v.exp();
        match spec.pdf(x) {
            Ok(p) => p * x, // dx = x dv on the log axis
            Err(_) => 0.0,
        }
    };
    // Find where the tail stops mattering.
    let mut hi = 1.0;
    while hi < 600.0 {
        if integrand(hi) < 1e-17 && integrand(hi + 0.5) < 1e-17 {
            break;
        }
        hi += 1.0;
    }
    let rough = adaptive_simpson(&integrand, 0.0, hi, 1e-6, 30).abs();
    adaptive_simpson(&integrand, 0.0, hi, (rough * 1e-11).max(1e-300), 48)
}

/// Asymptotic two-sided KS critical value at the given significance.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let c = if (alpha - 0.01).abs() < 1e-12 {
        1.627_624
    } else if (alpha - 0.05).abs() < 1e-12 {
        1.358_102
    } else {
        panic!("unsupported significance {alpha}")
    };
    c / (n as f64).sqrt()
}

/// Empirical KS distance of a sample against a model CDF.
pub fn ks_of_sample(spec: &ModelSpec, values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = spec.cdf(x).unwrap();
        worst = worst
            .max(((i + 1) as f64 / n - f).abs())
            .max((f - i as f64 / n).abs());
    }
    worst
}

/// Quick fixture: one journal per cohort row, explicit counts.
pub type FixtureRow<'a> = (&'a str, &'a str, i32, &'a [(i32, u32)]);

pub fn fixture_corpus(rows: &[FixtureRow]) -> (Vec<ArticleRecord>, CitationTable) {
    let mut records = Vec::new();
    let mut table = CitationTable::new();
    for (article, journal, y_p, counts) in rows {
        records.push(ArticleRecord {
            article_id: article.to_string(),
            journal_id: journal.to_string(),
            journal_title: format!("Journal {journal}"),
            year: *y_p,
            categories: vec![Classification {
                area: "area-0".to_string(),
                category: "cat-0".to_string(),
            }],
        });
        for (y, c) in *counts {
            table.insert_entry(article, *y, *c);
        }
    }
    (records, table)
}
