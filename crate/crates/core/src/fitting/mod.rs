//! Maximum-likelihood fitting of the six model families on a common tail,
//! KS goodness measures, x_min scanning, and likelihood-ratio model
//! selection with a parsimony tie-break.

mod optim;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::special::{erfc, ln_upper_incomplete_gamma, GAMMA_ARG_MAX, GAMMA_ARG_MIN};
use crate::distributions::{DistError, ModelFamily, ModelSpec, SampleVector};
use optim::{golden_max, maximize_box_2d, Box2};

#[derive(Debug, Clone, Error)]
pub enum FitError {
    #[error("insufficient tail: {n_tail} observations at or above x_min, need {min}")]
    InsufficientTail { n_tail: usize, min: usize },
    #[error("no observations at or above x_min")]
    EmptyTail,
    #[error("empty x_min grid")]
    EmptyGrid,
    #[error("no grid point produced a converged fit")]
    AllFitsFailed,
    #[error("model selection failed: {0}")]
    Selection(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Knobs shared by every fitting entry point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    /// Smallest tail size that is still fitted.
    pub tail_min: usize,
    /// Two-sided significance level below which the top-two likelihoods are
    /// considered distinguishable (no parsimony tie-break).
    pub alpha_level: f64,
    /// Cap on the number of x_min candidates in the default scan grid.
    pub scan_grid_cap: usize,
    /// Relative log-likelihood tolerance for the numerical maximizers.
    pub rel_tol: f64,
    /// Iteration cap per Nelder-Mead run.
    pub max_iter: usize,
    /// Fitting box for the PLE exponent.
    pub ple_alpha_range: (f64, f64),
    /// Fitting box for the dimensionless PLE rate lambda * x_min, so the
    /// fit is covariant under rescaling of the data.
    pub ple_rate_range: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tail_min: 50,
            alpha_level: 0.1,
            scan_grid_cap: 200,
            rel_tol: 1e-8,
            max_iter: 400,
            ple_alpha_range: (1.0 + 1e-6, 6.0),
            ple_rate_range: (1e-6, 10.0),
        }
    }
}

/// One fitted model on one tail.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub n_tail: usize,
    pub log_likelihood: f64,
    pub ks_distance: f64,
    pub converged: bool,
}

/// Standardized log-likelihood ratio between two fitted families and its
/// two-sided p-value under the normal null (Vuong construction).
#[derive(Debug, Clone, Serialize)]
pub struct PairwiseRatio {
    pub family_a: ModelFamily,
    pub family_b: ModelFamily,
    pub ratio: f64,
    pub p_value: f64,
}

/// Outcome of fitting all six families on a common tail.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    pub best: ModelFamily,
    pub x_min: f64,
    /// One fit per family, in [`ModelFamily::ALL`] order.
    pub fits: Vec<FitResult>,
    /// Ratios for every pair of converged fits.
    pub pairwise: Vec<PairwiseRatio>,
    /// Exponent of the forced-PLE fit, reported regardless of the winner.
    pub ple_alpha: f64,
}

impl SelectionResult {
    pub fn fit(&self, family: ModelFamily) -> &FitResult {
        &self.fits[ModelFamily::ALL
            .iter()
            .position(|&f| f == family)
            .expect("every family is present")]
    }
}

/// How the common truncation point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum XMinPolicy {
    Fixed(f64),
    /// KS-minimizing scan over the default grid, under the PLE family.
    Scan,
}

/// Sufficient statistics of a tail sample.
struct TailStats {
    n: f64,
    sum_x: f64,
    sum_ln: f64,
    sum_ln_sq: f64,
    x_min: f64,
}

impl TailStats {
    fn new(tail: &SampleVector, x_min: f64) -> Self {
        let mut sum_x = 0.0;
        let mut sum_ln = 0.0;
        let mut sum_ln_sq = 0.0;
        for &x in tail.values() {
            sum_x += x;
            let l = x.ln();
            sum_ln += l;
            sum_ln_sq += l * l;
        }
        TailStats {
            n: tail.len() as f64,
            sum_x,
            sum_ln,
            sum_ln_sq,
            x_min,
        }
    }

    fn mean(&self) -> f64 {
        self.sum_x / self.n
    }

    fn mean_ln(&self) -> f64 {
        self.sum_ln / self.n
    }

    fn sd_ln(&self) -> f64 {
        (self.sum_ln_sq / self.n - self.mean_ln().powi(2)).max(0.0).sqrt()
    }

    /// Truncated log-likelihood from sufficient statistics.
    fn log_likelihood(&self, spec: &ModelSpec) -> f64 {
        match *spec {
            ModelSpec::Pl { alpha, x_min } => {
                self.n * ((alpha - 1.0).ln() + (alpha - 1.0) * x_min.ln()) - alpha * self.sum_ln
            }
            ModelSpec::Exp { lambda, x_min } => {
                self.n * (lambda.ln() + lambda * x_min) - lambda * self.sum_x
            }
            ModelSpec::Ple {
                alpha,
                lambda,
                x_min,
            } => {
                let z = lambda * x_min;
                if !(GAMMA_ARG_MIN..=GAMMA_ARG_MAX).contains(&z) {
                    return f64::NEG_INFINITY;
                }
                match ln_upper_incomplete_gamma(1.0 - alpha, z) {
                    Ok(ln_norm) => {
                        self.n * ((1.0 - alpha) * lambda.ln() - ln_norm)
                            - alpha * self.sum_ln
                            - lambda * self.sum_x
                    }
                    Err(_) => f64::NEG_INFINITY,
                }
            }
            ModelSpec::Ln { mu, sigma, x_min } | ModelSpec::Lnp { mu, sigma, x_min } => {
                let t0 = (x_min.ln() - mu) / (std::f64::consts::SQRT_2 * sigma);
                let tail_norm = erfc(t0);
                if tail_norm <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let quad = self.sum_ln_sq - 2.0 * mu * self.sum_ln + self.n * mu * mu;
                self.n * (0.5 * (2.0 / (std::f64::consts::PI * sigma * sigma)).ln()
                    - tail_norm.ln())
                    - self.sum_ln
                    - quad / (2.0 * sigma * sigma)
            }
            // Needs sum of x^beta, which is not a fixed statistic.
            ModelSpec::Stex { .. } => unreachable!("STEX goes through its profile likelihood"),
        }
    }
}

/// Fit one family on the tail of `data` at or above `x_min`.
///
/// PL and EXP use their closed-form estimators; LN, LNP and PLE use bounded
/// Nelder-Mead with three starts; STEX profiles out its rate and maximizes
/// the stretch exponent on a line. Degenerate inputs (zero variance and the
/// like) come back with `converged = false` rather than an error.
pub fn fit_mle(
    family: ModelFamily,
    data: &SampleVector,
    x_min: f64,
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    if !(x_min.is_finite() && x_min > 0.0) {
        return Err(DistError::InvalidParameter {
            name: "x_min",
            reason: "must be finite and > 0".to_string(),
        }
        .into());
    }
    let tail = data.tail(x_min);
    if tail.len() < opts.tail_min {
        return Err(FitError::InsufficientTail {
            n_tail: tail.len(),
            min: opts.tail_min,
        });
    }
    let stats = TailStats::new(&tail, x_min);

    let fitted = match family {
        ModelFamily::Pl => fit_pl(&stats),
        ModelFamily::Exp => fit_exp(&stats),
        ModelFamily::Ple => fit_ple(&stats, opts),
        ModelFamily::Stex => fit_stex(&tail, &stats, opts),
        ModelFamily::Ln => fit_lognormal(&stats, opts, false),
        ModelFamily::Lnp => fit_lognormal(&stats, opts, true),
    };

    let (spec, log_likelihood, converged) = match fitted {
        Some(v) => v,
        None => {
            return Ok(FitResult {
                spec: placeholder_spec(family, x_min),
                n_tail: tail.len(),
                log_likelihood: f64::NEG_INFINITY,
                ks_distance: f64::NAN,
                converged: false,
            })
        }
    };

    let ks_distance = if converged {
        ks_statistic(&spec, &tail)?
    } else {
        f64::NAN
    };
    Ok(FitResult {
        spec,
        n_tail: tail.len(),
        log_likelihood,
        ks_distance,
        converged,
    })
}

/// A structurally valid spec for degenerate fits that never compete.
fn placeholder_spec(family: ModelFamily, x_min: f64) -> ModelSpec {
    match family {
        ModelFamily::Pl => ModelSpec::Pl { alpha: 2.0, x_min },
        ModelFamily::Ple => ModelSpec::Ple {
            alpha: 2.0,
            lambda: 1.0 / x_min.max(1.0),
            x_min,
        },
        ModelFamily::Exp => ModelSpec::Exp { lambda: 1.0, x_min },
        ModelFamily::Stex => ModelSpec::Stex {
            lambda: 1.0,
            beta: 1.0,
            x_min,
        },
        ModelFamily::Ln => ModelSpec::Ln {
            mu: 0.0,
            sigma: 1.0,
            x_min,
        },
        ModelFamily::Lnp => ModelSpec::Lnp {
            mu: 1e-9,
            sigma: 1.0,
            x_min,
        },
    }
}

fn fit_pl(stats: &TailStats) -> Option<(ModelSpec, f64, bool)> {
    let denom = stats.sum_ln - stats.n * stats.x_min.ln();
    if denom <= 1e-12 * stats.n {
        return None;
    }
    let alpha = 1.0 + stats.n / denom;
    let spec = ModelSpec::Pl {
        alpha,
        x_min: stats.x_min,
    };
    Some((spec, stats.log_likelihood(&spec), true))
}

fn fit_exp(stats: &TailStats) -> Option<(ModelSpec, f64, bool)> {
    let gap = stats.mean() - stats.x_min;
    if gap <= 1e-12 * stats.x_min.max(1.0) {
        return None;
    }
    let lambda = 1.0 / gap;
    let spec = ModelSpec::Exp {
        lambda,
        x_min: stats.x_min,
    };
    Some((spec, stats.log_likelihood(&spec), true))
}

fn fit_ple(stats: &TailStats, opts: &FitOptions) -> Option<(ModelSpec, f64, bool)> {
    let x_min = stats.x_min;
    let (alpha_lo, alpha_hi) = opts.ple_alpha_range;
    // Search over the dimensionless rate z = lambda * x_min: the likelihood
    // is exactly covariant in it, so scaled data reproduce scaled fits, and
    // the box stays inside the incomplete-gamma domain by construction.
    let rate_lo = opts.ple_rate_range.0.max(1.05 * GAMMA_ARG_MIN);
    let rate_hi = opts.ple_rate_range.1.min(0.9 * GAMMA_ARG_MAX);
    if rate_lo >= rate_hi || alpha_lo >= alpha_hi {
        return None;
    }
    let bounds = Box2 {
        lo: [alpha_lo, rate_lo.ln()],
        hi: [alpha_hi, rate_hi.ln()],
    };
    let objective = |p: [f64; 2]| {
        let spec = ModelSpec::Ple {
            alpha: p[0],
            lambda: p[1].exp() / x_min,
            x_min,
        };
        stats.log_likelihood(&spec)
    };
    // Dimensionless spread of the tail seeds the rate starts.
    let gap_rate = x_min / (stats.mean() - x_min).max(1e-9 * x_min);
    let clamp_z = |z: f64| z.clamp(rate_lo * 1.0001, rate_hi * 0.9999).ln();
    let starts = [
        [1.3_f64.clamp(alpha_lo, alpha_hi), clamp_z(gap_rate)],
        [2.5_f64.clamp(alpha_lo, alpha_hi), clamp_z(0.3 * gap_rate)],
        [4.0_f64.clamp(alpha_lo, alpha_hi), clamp_z(0.05 * gap_rate)],
    ];
    let (arg, val, conv) = maximize_box_2d(objective, bounds, &starts, opts.rel_tol, opts.max_iter);
    if !val.is_finite() {
        return None;
    }
    // Polish each coordinate so the optimum is pinned well below the scale
    // covariance tolerance.
    let (arg, val) = polish_2d(&objective, bounds, arg, val);
    let spec = ModelSpec::Ple {
        alpha: arg[0],
        lambda: arg[1].exp() / x_min,
        x_min,
    };
    Some((spec, val, conv))
}

/// Finite-difference Newton refinement of a 2-D maximum around `start`.
/// Handles the strong ridge correlation between the exponent and the rate
/// that coordinate-wise searches zigzag on.
fn polish_2d<F>(f: &F, bounds: Box2, start: [f64; 2], start_val: f64) -> ([f64; 2], f64)
where
    F: Fn([f64; 2]) -> f64,
{
    let mut x = start;
    let mut fx = start_val;
    let h = [
        1e-5 * (bounds.hi[0] - bounds.lo[0]),
        1e-5 * (bounds.hi[1] - bounds.lo[1]),
    ];
    let clamp = |p: [f64; 2]| {
        [
            p[0].clamp(bounds.lo[0], bounds.hi[0]),
            p[1].clamp(bounds.lo[1], bounds.hi[1]),
        ]
    };
    for _ in 0..8 {
        let at = |d0: f64, d1: f64| f(clamp([x[0] + d0, x[1] + d1]));
        let fp0 = at(h[0], 0.0);
        let fm0 = at(-h[0], 0.0);
        let fp1 = at(0.0, h[1]);
        let fm1 = at(0.0, -h[1]);
        let fpp = at(h[0], h[1]);
        let fpm = at(h[0], -h[1]);
        let fmp = at(-h[0], h[1]);
        let fmm = at(-h[0], -h[1]);
        let g = [(fp0 - fm0) / (2.0 * h[0]), (fp1 - fm1) / (2.0 * h[1])];
        let h00 = (fp0 - 2.0 * fx + fm0) / (h[0] * h[0]);
        let h11 = (fp1 - 2.0 * fx + fm1) / (h[1] * h[1]);
        let h01 = (fpp - fpm - fmp + fmm) / (4.0 * h[0] * h[1]);
        let det = h00 * h11 - h01 * h01;
        // A maximum needs a negative-definite Hessian; bail out otherwise
        // (boundary optimum or flat direction) and keep the search result.
        if !(det > 0.0 && h00 < 0.0) {
            break;
        }
        let step = [
            -(h11 * g[0] - h01 * g[1]) / det,
            -(h00 * g[1] - h01 * g[0]) / det,
        ];
        let mut candidate = clamp([x[0] + step[0], x[1] + step[1]]);
        let mut fc = f(candidate);
        let mut halvings = 0;
        while fc < fx && halvings < 4 {
            candidate = clamp([
                x[0] + (candidate[0] - x[0]) * 0.5,
                x[1] + (candidate[1] - x[1]) * 0.5,
            ]);
            fc = f(candidate);
            halvings += 1;
        }
        if fc < fx {
            break;
        }
        let moved = (candidate[0] - x[0]).abs() + (candidate[1] - x[1]).abs();
        x = candidate;
        fx = fc;
        if moved < 1e-10 {
            break;
        }
    }
    (x, fx)
}

fn fit_lognormal(
    stats: &TailStats,
    opts: &FitOptions,
    positive_mu: bool,
) -> Option<(ModelSpec, f64, bool)> {
    let m = stats.mean_ln();
    let s = stats.sd_ln();
    // The threshold absorbs the cancellation noise of the one-pass variance.
    if s < 1e-6 {
        // Zero variance in log space: sigma collapses to the boundary.
        return None;
    }
    let spread = s + 0.5;
    let mut mu_lo = m - 10.0 * spread;
    let mu_hi = m + 2.0 * spread;
    if positive_mu {
        mu_lo = mu_lo.max(1e-9);
        if mu_lo >= mu_hi {
            // All of the admissible box collapses; pin mu just above zero.
            mu_lo = 1e-9;
        }
    }
    let mu_hi = mu_hi.max(mu_lo + 1e-6);
    let bounds = Box2 {
        lo: [mu_lo, (s / 20.0).max(1e-4).ln()],
        hi: [mu_hi, (10.0 * (s + 0.1)).ln()],
    };
    let x_min = stats.x_min;
    let make = |mu: f64, sigma: f64| -> ModelSpec {
        if positive_mu {
            ModelSpec::Lnp { mu, sigma, x_min }
        } else {
            ModelSpec::Ln { mu, sigma, x_min }
        }
    };
    let objective = |p: [f64; 2]| stats.log_likelihood(&make(p[0], p[1].exp()));
    let clamp_mu = |mu: f64| mu.clamp(mu_lo + 1e-9, mu_hi - 1e-9);
    let starts = [
        [clamp_mu(m), s.ln()],
        [clamp_mu(m - 2.0 * spread), (2.0 * s).max(1e-3).ln()],
        [clamp_mu(m - 5.0 * spread), (3.0 * s + 1.0).ln()],
    ];
    let (arg, val, conv) = maximize_box_2d(objective, bounds, &starts, opts.rel_tol, opts.max_iter);
    if !val.is_finite() {
        return None;
    }
    Some((make(arg[0], arg[1].exp()), val, conv))
}

fn fit_stex(
    tail: &SampleVector,
    stats: &TailStats,
    opts: &FitOptions,
) -> Option<(ModelSpec, f64, bool)> {
    let x_min = stats.x_min;
    let n = stats.n;
    // The rate has a closed-form profile maximum given beta:
    // lambda(beta) = n / (sum x^beta - n x_min^beta), which turns the fit
    // into a 1-D search over the stretch exponent.
    let profile = |beta: f64| -> Option<(f64, f64)> {
        let base = x_min.powf(beta);
        let sum_pow: f64 = tail.values().iter().map(|&x| x.powf(beta)).sum();
        let denom = sum_pow - n * base;
        if !(denom.is_finite() && denom > 0.0) {
            return None;
        }
        let lambda = n / denom;
        let ll = n * (beta.ln() + lambda.ln()) + (beta - 1.0) * stats.sum_ln - n;
        Some((lambda, ll))
    };
    let ll_of = |ln_beta: f64| -> f64 {
        profile(ln_beta.exp()).map_or(f64::NEG_INFINITY, |(_, ll)| ll)
    };

    let (lo, hi) = (0.05_f64.ln(), 5.0_f64.ln());
    let grid_n = 25;
    let mut best_i = 0usize;
    let mut best_ll = f64::NEG_INFINITY;
    for i in 0..grid_n {
        let lb = lo + (hi - lo) * i as f64 / (grid_n - 1) as f64;
        let ll = ll_of(lb);
        if ll > best_ll {
            best_ll = ll;
            best_i = i;
        }
    }
    if !best_ll.is_finite() {
        return None;
    }
    let step = (hi - lo) / (grid_n - 1) as f64;
    let bracket_lo = lo + step * best_i.saturating_sub(1) as f64;
    let bracket_hi = (lo + step * (best_i + 1) as f64).min(hi);
    let (ln_beta, ll) = golden_max(ll_of, bracket_lo, bracket_hi, opts.max_iter);
    let beta = ln_beta.exp();
    let (lambda, _) = profile(beta)?;
    let spec = ModelSpec::Stex {
        lambda,
        beta,
        x_min,
    };
    Some((spec, ll, true))
}

/// Kolmogorov-Smirnov distance between the fitted model and the empirical
/// CDF of the tail observations.
pub fn ks_statistic(spec: &ModelSpec, data: &SampleVector) -> Result<f64, FitError> {
    spec.validate()?;
    let sorted = {
        let tail = data.tail(spec.x_min());
        if tail.is_empty() {
            return Err(FitError::EmptyTail);
        }
        tail.sorted_values()
    };
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = 1.0 - spec.ccdf_unchecked(x);
        let upper = ((i + 1) as f64 / n - f).abs();
        let lower = (f - i as f64 / n).abs();
        worst = worst.max(upper).max(lower);
    }
    Ok(worst)
}

/// Default x_min scan grid: distinct data values up to the 90th percentile,
/// thinned to at most `cap` points.
pub fn default_xmin_grid(data: &SampleVector, cap: usize) -> Vec<f64> {
    let sorted = data.sorted_values();
    if sorted.is_empty() {
        return Vec::new();
    }
    let q90_idx = ((sorted.len() as f64 * 0.9).ceil() as usize).clamp(1, sorted.len()) - 1;
    let q90 = sorted[q90_idx];
    let mut distinct: Vec<f64> = Vec::new();
    for &v in &sorted {
        if v > q90 {
            break;
        }
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
    }
    if distinct.len() > cap.max(1) {
        let stride = distinct.len().div_ceil(cap.max(1));
        distinct = distinct.into_iter().step_by(stride).collect();
    }
    distinct
}

/// Scan the grid for the truncation point whose fit minimizes the KS
/// distance, returning that point and its fit.
pub fn scan_xmin(
    family: ModelFamily,
    data: &SampleVector,
    grid: &[f64],
    opts: &FitOptions,
) -> Result<(f64, FitResult), FitError> {
    if grid.is_empty() {
        return Err(FitError::EmptyGrid);
    }
    let mut best: Option<(f64, FitResult)> = None;
    for &x_min in grid {
        let fit = match fit_mle(family, data, x_min, opts) {
            Ok(f) => f,
            Err(FitError::InsufficientTail { .. }) => continue,
            Err(e) => return Err(e),
        };
        if !fit.converged || !fit.ks_distance.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, b)) => fit.ks_distance < b.ks_distance,
        };
        if better {
            best = Some((x_min, fit));
        }
    }
    best.ok_or(FitError::AllFitsFailed)
}

/// Fit all six families on one common tail and pick the best by
/// log-likelihood, with the Vuong-style ratio and the parsimony tie-break
/// deciding statistically indistinguishable top pairs.
pub fn select_best(
    data: &SampleVector,
    policy: XMinPolicy,
    opts: &FitOptions,
) -> Result<SelectionResult, FitError> {
    let x_min = match policy {
        XMinPolicy::Fixed(x) => x,
        XMinPolicy::Scan => {
            let grid = default_xmin_grid(data, opts.scan_grid_cap);
            scan_xmin(ModelFamily::Ple, data, &grid, opts)?.0
        }
    };
    let tail = data.tail(x_min);
    if tail.len() < opts.tail_min {
        return Err(FitError::InsufficientTail {
            n_tail: tail.len(),
            min: opts.tail_min,
        });
    }

    let fits: Vec<FitResult> = ModelFamily::ALL
        .par_iter()
        .map(|&family| fit_mle(family, data, x_min, opts))
        .collect::<Result<_, _>>()?;

    let converged_idx: Vec<usize> = (0..fits.len()).filter(|&i| fits[i].converged).collect();
    if converged_idx.len() < 2 {
        return Err(FitError::Selection(format!(
            "only {} of 6 family fits converged",
            converged_idx.len()
        )));
    }

    // Pointwise log-densities feed the pairwise ratios.
    let tail_values = tail.values();
    let log_pdfs: Vec<Option<Vec<f64>>> = fits
        .iter()
        .map(|fit| {
            fit.converged.then(|| {
                tail_values
                    .iter()
                    .map(|&x| fit.spec.log_pdf_unchecked(x))
                    .collect()
            })
        })
        .collect();

    let mut pairwise = Vec::new();
    for (ai, &i) in converged_idx.iter().enumerate() {
        for &j in &converged_idx[ai + 1..] {
            let (ratio, p_value) = vuong_ratio(
                log_pdfs[i].as_ref().expect("converged fit has log pdfs"),
                log_pdfs[j].as_ref().expect("converged fit has log pdfs"),
            );
            pairwise.push(PairwiseRatio {
                family_a: ModelFamily::ALL[i],
                family_b: ModelFamily::ALL[j],
                ratio,
                p_value,
            });
        }
    }

    // Rank converged fits by likelihood; exact ties fall back to enum order.
    let mut ranking = converged_idx.clone();
    ranking.sort_by(|&a, &b| {
        fits[b]
            .log_likelihood
            .partial_cmp(&fits[a].log_likelihood)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let top = ranking[0];
    let runner_up = ranking[1];
    let top_family = ModelFamily::ALL[top];
    let second_family = ModelFamily::ALL[runner_up];
    let top_pair_p = pairwise
        .iter()
        .find(|p| {
            (p.family_a == top_family && p.family_b == second_family)
                || (p.family_a == second_family && p.family_b == top_family)
        })
        .map(|p| p.p_value)
        .unwrap_or(1.0);

    let best = if top_pair_p > opts.alpha_level
        && second_family.parsimony_rank() < top_family.parsimony_rank()
    {
        second_family
    } else {
        top_family
    };

    let ple_alpha = match fits[1].spec {
        ModelSpec::Ple { alpha, .. } => alpha,
        _ => unreachable!("index 1 is the PLE fit"),
    };

    Ok(SelectionResult {
        best,
        x_min,
        fits,
        pairwise,
        ple_alpha,
    })
}

/// Standardized log-likelihood ratio R = sum(d) / (sd(d) sqrt(n)) and its
/// two-sided normal p-value, where d are the pointwise log-density
/// differences. Indistinguishable fits (zero variance) get p = 1.
fn vuong_ratio(lp_a: &[f64], lp_b: &[f64]) -> (f64, f64) {
    let n = lp_a.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (&a, &b) in lp_a.iter().zip(lp_b) {
        let d = a - b;
        sum += d;
        sum_sq += d * d;
    }
    let var = (sum_sq / n - (sum / n).powi(2)).max(0.0);
    if var < 1e-24 {
        return (0.0, 1.0);
    }
    let ratio = sum / (var.sqrt() * n.sqrt());
    let p = erfc(ratio.abs() / std::f64::consts::SQRT_2);
    (ratio, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn options() -> FitOptions {
        FitOptions::default()
    }

    #[test]
    fn pl_closed_form_recovers_exponent() {
        let spec = ModelSpec::pl(2.5, 1.0).unwrap();
        let data = spec.sample(100_000, 11).unwrap();
        let fit = fit_mle(ModelFamily::Pl, &data, 1.0, &options()).unwrap();
        let ModelSpec::Pl { alpha, .. } = fit.spec else {
            panic!("wrong family")
        };
        // Standard error is (alpha - 1) / sqrt(n) ~ 0.0047.
        assert!((alpha - 2.5).abs() < 0.02, "alpha = {alpha}");
        assert!(fit.converged);
        assert!(fit.log_likelihood.is_finite());
    }

    #[test]
    fn exp_moment_estimator() {
        let spec = ModelSpec::exp(0.5, 2.0).unwrap();
        let data = spec.sample(100_000, 12).unwrap();
        let fit = fit_mle(ModelFamily::Exp, &data, 2.0, &options()).unwrap();
        let ModelSpec::Exp { lambda, .. } = fit.spec else {
            panic!("wrong family")
        };
        assert!((lambda - 0.5).abs() < 0.01, "lambda = {lambda}");
    }

    #[test]
    fn constant_data_degenerates_for_lognormal() {
        let data = SampleVector::new(vec![3.0; 200]).unwrap();
        let fit = fit_mle(ModelFamily::Ln, &data, 1.0, &options()).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.log_likelihood, f64::NEG_INFINITY);
    }

    #[test]
    fn insufficient_tail_is_an_error() {
        let data = SampleVector::new((1..=30).map(f64::from).collect()).unwrap();
        match fit_mle(ModelFamily::Pl, &data, 1.0, &options()) {
            Err(FitError::InsufficientTail { n_tail: 30, min: 50 }) => {}
            other => panic!("expected insufficient tail, got {other:?}"),
        }
    }

    #[test]
    fn ks_statistic_on_plugin_quantiles() {
        // Data placed exactly at the model quantiles of ranks (i - 0.5) / n
        // must have KS distance of 0.5 / n.
        let spec = ModelSpec::pl(2.5, 1.0).unwrap();
        let n = 200;
        let values: Vec<f64> = (1..=n)
            .map(|i| {
                let u = 1.0 - (i as f64 - 0.5) / n as f64; // target ccdf
                1.0 * u.powf(-1.0 / 1.5)
            })
            .collect();
        let data = SampleVector::new(values).unwrap();
        let d = ks_statistic(&spec, &data).unwrap();
        assert!(
            (d - 0.5 / n as f64).abs() < 1e-12,
            "d = {d}, expect {}",
            0.5 / n as f64
        );
    }

    #[test]
    fn ks_statistic_single_observation_at_median() {
        let spec = ModelSpec::exp(1.0, 1.0).unwrap();
        let median = 1.0 + std::f64::consts::LN_2;
        let data = SampleVector::new(vec![median]).unwrap();
        let d = ks_statistic(&spec, &data).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_statistic_empty_tail_errors() {
        let spec = ModelSpec::pl(2.0, 100.0).unwrap();
        let data = SampleVector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            ks_statistic(&spec, &data),
            Err(FitError::EmptyTail)
        ));
    }

    #[test]
    fn scan_xmin_singleton_grid_returns_that_point() {
        let spec = ModelSpec::pl(2.5, 1.0).unwrap();
        let data = spec.sample(2000, 5).unwrap();
        let (x_min, fit) = scan_xmin(ModelFamily::Pl, &data, &[1.0], &options()).unwrap();
        assert_eq!(x_min, 1.0);
        assert!(fit.converged);
    }

    #[test]
    fn scan_xmin_empty_grid_errors() {
        let data = ModelSpec::pl(2.5, 1.0).unwrap().sample(500, 5).unwrap();
        assert!(matches!(
            scan_xmin(ModelFamily::Pl, &data, &[], &options()),
            Err(FitError::EmptyGrid)
        ));
    }

    #[test]
    fn default_grid_is_thinned_and_capped() {
        let spec = ModelSpec::ln(2.0, 1.0, 0.5).unwrap();
        let data = spec.sample(50_000, 3).unwrap();
        let grid = default_xmin_grid(&data, 200);
        assert!(!grid.is_empty());
        assert!(grid.len() <= 200);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn selection_is_permutation_invariant() {
        let spec = ModelSpec::ln(1.0, 1.0, 0.5).unwrap();
        let data = spec.sample(2000, 17).unwrap();
        let forward = select_best(&data, XMinPolicy::Fixed(0.5), &options()).unwrap();
        let mut reversed_vals = data.values().to_vec();
        reversed_vals.reverse();
        let reversed = SampleVector::new(reversed_vals).unwrap();
        let backward = select_best(&reversed, XMinPolicy::Fixed(0.5), &options()).unwrap();
        assert_eq!(forward.best, backward.best);
        // Summation order differs, so allow float-roundoff slack.
        assert!((forward.ple_alpha - backward.ple_alpha).abs() < 1e-6);
        for (a, b) in forward.fits.iter().zip(&backward.fits) {
            let scale = a.log_likelihood.abs().max(1.0);
            assert!((a.log_likelihood - b.log_likelihood).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn scale_covariance_of_estimators() {
        let spec = ModelSpec::pl(2.5, 1.0).unwrap();
        let data = spec.sample(20_000, 23).unwrap();
        let k = 7.0;
        let scaled =
            SampleVector::new(data.values().iter().map(|&v| v * k).collect()).unwrap();

        let fit = fit_mle(ModelFamily::Pl, &data, 1.0, &options()).unwrap();
        let fit_k = fit_mle(ModelFamily::Pl, &scaled, k, &options()).unwrap();
        let (ModelSpec::Pl { alpha: a1, .. }, ModelSpec::Pl { alpha: a2, .. }) =
            (fit.spec, fit_k.spec)
        else {
            panic!("wrong family")
        };
        assert!((a1 - a2).abs() < 1e-9 * a1.abs());

        let efit = fit_mle(ModelFamily::Exp, &data, 1.0, &options()).unwrap();
        let efit_k = fit_mle(ModelFamily::Exp, &scaled, k, &options()).unwrap();
        let (ModelSpec::Exp { lambda: l1, .. }, ModelSpec::Exp { lambda: l2, .. }) =
            (efit.spec, efit_k.spec)
        else {
            panic!("wrong family")
        };
        assert!((l1 / k - l2).abs() < 1e-9 * l2.abs());
    }

    #[test]
    fn pl_closed_form_agrees_with_numerical_maximization() {
        let spec = ModelSpec::pl(2.5, 1.0).unwrap();
        let data = spec.sample(20_000, 37).unwrap();
        let stats = TailStats::new(&data.tail(1.0), 1.0);
        let fit = fit_pl(&stats).unwrap();
        let ModelSpec::Pl { alpha: closed, .. } = fit.0 else {
            panic!("wrong family")
        };
        let (numerical, _) = golden_max(
            |alpha| {
                stats.log_likelihood(&ModelSpec::Pl { alpha, x_min: 1.0 })
            },
            1.0 + 1e-9,
            8.0,
            200,
        );
        assert!(
            (closed - numerical).abs() < 1e-4,
            "closed {closed} vs numerical {numerical}"
        );
    }

    #[test]
    fn ple_scale_covariance() {
        let truth = ModelSpec::ple(2.3, 0.05, 1.0).unwrap();
        let data = truth.sample(20_000, 29).unwrap();
        let k = 13.0;
        let scaled =
            SampleVector::new(data.values().iter().map(|&v| v * k).collect()).unwrap();
        let fit = fit_mle(ModelFamily::Ple, &data, 1.0, &options()).unwrap();
        let fit_k = fit_mle(ModelFamily::Ple, &scaled, k, &options()).unwrap();
        let (
            ModelSpec::Ple {
                alpha: a1,
                lambda: l1,
                ..
            },
            ModelSpec::Ple {
                alpha: a2,
                lambda: l2,
                ..
            },
        ) = (fit.spec, fit_k.spec)
        else {
            panic!("wrong family")
        };
        assert!((a1 - a2).abs() < 1e-6 * a1.abs(), "{a1} vs {a2}");
        assert!((l1 / k - l2).abs() < 1e-6 * l2.abs(), "{} vs {l2}", l1 / k);
    }

    #[test]
    fn numerical_pl_agreement_via_ple_limit() {
        // With the rate pinned at its lower bound the PLE fit approaches the
        // closed-form PL exponent on pure power-law data.
        let spec = ModelSpec::pl(2.5, 1.0).unwrap();
        let data = spec.sample(20_000, 31).unwrap();
        let sel = select_best(&data, XMinPolicy::Fixed(1.0), &options()).unwrap();
        let pl_fit = sel.fit(ModelFamily::Pl);
        let ple_fit = sel.fit(ModelFamily::Ple);
        let ModelSpec::Pl { alpha: a_pl, .. } = pl_fit.spec else {
            panic!()
        };
        let ModelSpec::Ple { alpha: a_ple, .. } = ple_fit.spec else {
            panic!()
        };
        assert!((a_pl - a_ple).abs() < 0.1, "{a_pl} vs {a_ple}");
        // Parsimony tie-break: PL must beat the nested PLE here.
        assert_eq!(sel.best, ModelFamily::Pl);
    }
}
