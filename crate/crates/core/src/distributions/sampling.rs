//! Seeded samplers for the truncated model distributions.
//!
//! PL, EXP and STEX invert their closed-form CCDFs; LN and LNP go through
//! the normal quantile in upper-tail form; PLE has no closed-form inverse
//! and is drawn by bisecting its CCDF inside a precomputed bracket table,
//! polished with Newton steps.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::special::{self, norm_quantile};
use super::{DistError, ModelSpec, SampleVector};

pub(super) fn sample(spec: &ModelSpec, n: usize, seed: u64) -> Result<SampleVector, DistError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let values = match *spec {
        ModelSpec::Pl { alpha, x_min } => (0..n)
            .map(|_| x_min * open_unit(&mut rng).powf(-1.0 / (alpha - 1.0)))
            .collect(),
        ModelSpec::Exp { lambda, x_min } => (0..n)
            .map(|_| x_min - open_unit(&mut rng).ln() / lambda)
            .collect(),
        ModelSpec::Stex {
            lambda,
            beta,
            x_min,
        } => {
            let base = x_min.powf(beta);
            (0..n)
                .map(|_| (base - open_unit(&mut rng).ln() / lambda).powf(1.0 / beta))
                .collect()
        }
        ModelSpec::Ln { mu, sigma, x_min } | ModelSpec::Lnp { mu, sigma, x_min } => {
            let q0 = 0.5 * special::erfc((x_min.ln() - mu) / (std::f64::consts::SQRT_2 * sigma));
            if q0 <= 0.0 {
                return Err(DistError::InvalidParameter {
                    name: "x_min",
                    reason: "no probability mass above the truncation point".to_string(),
                });
            }
            (0..n)
                .map(|_| {
                    let q = q0 * open_unit(&mut rng);
                    if q >= 1.0 {
                        x_min
                    } else {
                        (mu + sigma * -norm_quantile(q)).exp().max(x_min)
                    }
                })
                .collect()
        }
        ModelSpec::Ple { .. } => {
            let table = PleQuantileTable::build(spec)?;
            (0..n).map(|_| table.draw(open_unit(&mut rng))).collect()
        }
    };
    SampleVector::new(values)
}

/// Uniform draw on (0, 1].
fn open_unit(rng: &mut StdRng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Bracket table of (x, ccdf) pairs for the PLE inverse CDF.
struct PleQuantileTable {
    spec: ModelSpec,
    xs: Vec<f64>,
    ccdfs: Vec<f64>,
}

impl PleQuantileTable {
    fn build(spec: &ModelSpec) -> Result<Self, DistError> {
        let ModelSpec::Ple { lambda, x_min, .. } = *spec else {
            unreachable!("PleQuantileTable is only built for PLE specs");
        };
        let mut xs = vec![x_min];
        let mut ccdfs = vec![1.0];
        let mut x = x_min;
        // Geometric growth; the exponential cut-off guarantees the CCDF
        // collapses well before lambda * x leaves the gamma domain.
        for _ in 0..2000 {
            x *= 1.05;
            if lambda * x > special::GAMMA_ARG_MAX - 10.0 {
                break;
            }
            let c = spec.ccdf_unchecked(x);
            xs.push(x);
            ccdfs.push(c);
            if c < 1e-13 {
                break;
            }
        }
        Ok(PleQuantileTable {
            spec: *spec,
            xs,
            ccdfs,
        })
    }

    /// Solve ccdf(x) = u for x.
    fn draw(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return self.xs[0];
        }
        if u <= *self.ccdfs.last().expect("table nonempty") {
            return *self.xs.last().expect("table nonempty");
        }
        // ccdfs is strictly decreasing: find i with ccdfs[i] >= u > ccdfs[i+1].
        let mut lo_idx = 0;
        let mut hi_idx = self.ccdfs.len() - 1;
        while hi_idx - lo_idx > 1 {
            let mid = (lo_idx + hi_idx) / 2;
            if self.ccdfs[mid] >= u {
                lo_idx = mid;
            } else {
                hi_idx = mid;
            }
        }
        let (mut lo, mut hi) = (self.xs[lo_idx], self.xs[hi_idx]);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..60 {
            let g = self.spec.ccdf_unchecked(x) - u;
            if g > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo < 1e-12 * x.abs() || g.abs() < 1e-14 {
                break;
            }
            // Newton step on ccdf(x) - u; fall back to bisection when it
            // leaves the bracket.
            let pdf = self.spec.log_pdf_unchecked(x).exp();
            let newton = x + g / pdf;
            x = if pdf > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}
