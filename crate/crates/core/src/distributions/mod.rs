//! The six candidate model distributions for yearly citation counts, all
//! left-truncated at `x_min`: simple power law, power law with exponential
//! cut-off, exponential, stretched exponential, log-normal, and the
//! positive-location log-normal.
//!
//! Densities, CDFs and samplers are continuous and live on `[x_min, inf)`.

pub mod sampling;
pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use special::{erfc, ln_upper_incomplete_gamma};

/// Errors from distribution construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("out of supported range: {0}")]
    OutOfRange(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

/// The six model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "PL")]
    Pl,
    #[serde(rename = "PLE")]
    Ple,
    #[serde(rename = "EXP")]
    Exp,
    #[serde(rename = "STEX")]
    Stex,
    #[serde(rename = "LN")]
    Ln,
    #[serde(rename = "LNP")]
    Lnp,
}

impl ModelFamily {
    /// Enumeration order used everywhere results are combined.
    pub const ALL: [ModelFamily; 6] = [
        ModelFamily::Pl,
        ModelFamily::Ple,
        ModelFamily::Exp,
        ModelFamily::Stex,
        ModelFamily::Ln,
        ModelFamily::Lnp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelFamily::Pl => "PL",
            ModelFamily::Ple => "PLE",
            ModelFamily::Exp => "EXP",
            ModelFamily::Stex => "STEX",
            ModelFamily::Ln => "LN",
            ModelFamily::Lnp => "LNP",
        }
    }

    pub fn from_label(label: &str) -> Option<ModelFamily> {
        match label.to_ascii_uppercase().as_str() {
            "PL" => Some(ModelFamily::Pl),
            "PLE" => Some(ModelFamily::Ple),
            "EXP" => Some(ModelFamily::Exp),
            "STEX" => Some(ModelFamily::Stex),
            "LN" => Some(ModelFamily::Ln),
            "LNP" => Some(ModelFamily::Lnp),
            _ => None,
        }
    }

    /// Number of free parameters (x_min excluded).
    pub fn n_params(self) -> usize {
        match self {
            ModelFamily::Pl | ModelFamily::Exp => 1,
            _ => 2,
        }
    }

    /// Preference order for the parsimony tie-break: lower ranks win when
    /// two fits are statistically indistinguishable.
    pub fn parsimony_rank(self) -> u8 {
        match self {
            ModelFamily::Pl => 0,
            ModelFamily::Exp => 1,
            ModelFamily::Ple | ModelFamily::Ln | ModelFamily::Lnp => 2,
            ModelFamily::Stex => 3,
        }
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A fully parameterized model: one family plus its parameter vector and the
/// truncation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ModelSpec {
    #[serde(rename = "PL")]
    Pl { alpha: f64, x_min: f64 },
    #[serde(rename = "PLE")]
    Ple { alpha: f64, lambda: f64, x_min: f64 },
    #[serde(rename = "EXP")]
    Exp { lambda: f64, x_min: f64 },
    #[serde(rename = "STEX")]
    Stex { lambda: f64, beta: f64, x_min: f64 },
    #[serde(rename = "LN")]
    Ln { mu: f64, sigma: f64, x_min: f64 },
    #[serde(rename = "LNP")]
    Lnp { mu: f64, sigma: f64, x_min: f64 },
}

fn require(cond: bool, name: &'static str, reason: &str) -> Result<(), DistError> {
    if cond {
        Ok(())
    } else {
        Err(DistError::InvalidParameter {
            name,
            reason: reason.to_string(),
        })
    }
}

impl ModelSpec {
    pub fn pl(alpha: f64, x_min: f64) -> Result<Self, DistError> {
        let spec = ModelSpec::Pl { alpha, x_min };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ple(alpha: f64, lambda: f64, x_min: f64) -> Result<Self, DistError> {
        let spec = ModelSpec::Ple {
            alpha,
            lambda,
            x_min,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn exp(lambda: f64, x_min: f64) -> Result<Self, DistError> {
        let spec = ModelSpec::Exp { lambda, x_min };
        spec.validate()?;
        Ok(spec)
    }

    pub fn stex(lambda: f64, beta: f64, x_min: f64) -> Result<Self, DistError> {
        let spec = ModelSpec::Stex {
            lambda,
            beta,
            x_min,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ln(mu: f64, sigma: f64, x_min: f64) -> Result<Self, DistError> {
        let spec = ModelSpec::Ln { mu, sigma, x_min };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lnp(mu: f64, sigma: f64, x_min: f64) -> Result<Self, DistError> {
        let spec = ModelSpec::Lnp { mu, sigma, x_min };
        spec.validate()?;
        Ok(spec)
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Pl { .. } => ModelFamily::Pl,
            ModelSpec::Ple { .. } => ModelFamily::Ple,
            ModelSpec::Exp { .. } => ModelFamily::Exp,
            ModelSpec::Stex { .. } => ModelFamily::Stex,
            ModelSpec::Ln { .. } => ModelFamily::Ln,
            ModelSpec::Lnp { .. } => ModelFamily::Lnp,
        }
    }

    pub fn x_min(&self) -> f64 {
        match *self {
            ModelSpec::Pl { x_min, .. }
            | ModelSpec::Ple { x_min, .. }
            | ModelSpec::Exp { x_min, .. }
            | ModelSpec::Stex { x_min, .. }
            | ModelSpec::Ln { x_min, .. }
            | ModelSpec::Lnp { x_min, .. } => x_min,
        }
    }

    /// Check the family's parameter invariants.
    pub fn validate(&self) -> Result<(), DistError> {
        let x_min = self.x_min();
        require(
            x_min.is_finite() && x_min > 0.0,
            "x_min",
            "must be finite and > 0",
        )?;
        match *self {
            ModelSpec::Pl { alpha, .. } => {
                require(alpha.is_finite() && alpha > 1.0, "alpha", "must be > 1")
            }
            ModelSpec::Ple { alpha, lambda, .. } => {
                require(alpha.is_finite() && alpha > 0.0, "alpha", "must be > 0")?;
                require(lambda.is_finite() && lambda > 0.0, "lambda", "must be > 0")?;
                let z = lambda * x_min;
                require(
                    (special::GAMMA_ARG_MIN..=special::GAMMA_ARG_MAX).contains(&z),
                    "lambda",
                    &format!("lambda * x_min = {z} outside the supported incomplete-gamma range"),
                )
            }
            ModelSpec::Exp { lambda, .. } => {
                require(lambda.is_finite() && lambda > 0.0, "lambda", "must be > 0")
            }
            ModelSpec::Stex { lambda, beta, .. } => {
                require(lambda.is_finite() && lambda > 0.0, "lambda", "must be > 0")?;
                require(beta.is_finite() && beta > 0.0, "beta", "must be > 0")
            }
            ModelSpec::Ln { mu, sigma, x_min } | ModelSpec::Lnp { mu, sigma, x_min } => {
                if matches!(self, ModelSpec::Lnp { .. }) {
                    require(mu.is_finite() && mu > 0.0, "mu", "must be > 0 for LNP")?;
                } else {
                    require(mu.is_finite(), "mu", "must be finite")?;
                }
                require(sigma.is_finite() && sigma > 0.0, "sigma", "must be > 0")?;
                let t0 = (x_min.ln() - mu) / (std::f64::consts::SQRT_2 * sigma);
                require(
                    erfc(t0) > 0.0,
                    "x_min",
                    "truncation point too deep in the log-normal upper tail",
                )
            }
        }
    }

    fn check_support(&self, x: f64) -> Result<(), DistError> {
        if !x.is_finite() || x < self.x_min() {
            return Err(DistError::Domain(format!(
                "x = {x} is below the truncation point x_min = {}",
                self.x_min()
            )));
        }
        Ok(())
    }

    /// Natural log of the truncated density. Computed in log space so that
    /// values remain finite up to x around 1e6 and far into the tails.
    pub fn log_pdf(&self, x: f64) -> Result<f64, DistError> {
        self.validate()?;
        self.check_support(x)?;
        Ok(self.log_pdf_unchecked(x))
    }

    /// As [`log_pdf`](Self::log_pdf) without the validation pass; callers
    /// guarantee a valid spec and x >= x_min.
    pub(crate) fn log_pdf_unchecked(&self, x: f64) -> f64 {
        match *self {
            ModelSpec::Pl { alpha, x_min } => {
                (alpha - 1.0).ln() + (alpha - 1.0) * x_min.ln() - alpha * x.ln()
            }
            ModelSpec::Ple {
                alpha,
                lambda,
                x_min,
            } => {
                let ln_norm = ln_upper_incomplete_gamma(1.0 - alpha, lambda * x_min)
                    .expect("validated spec keeps lambda * x_min in range");
                (1.0 - alpha) * lambda.ln() - ln_norm - alpha * x.ln() - lambda * x
            }
            ModelSpec::Exp { lambda, x_min } => lambda.ln() + lambda * x_min - lambda * x,
            ModelSpec::Stex {
                lambda,
                beta,
                x_min,
            } => {
                beta.ln() + lambda.ln() + lambda * x_min.powf(beta) + (beta - 1.0) * x.ln()
                    - lambda * x.powf(beta)
            }
            ModelSpec::Ln { mu, sigma, x_min } | ModelSpec::Lnp { mu, sigma, x_min } => {
                let t0 = (x_min.ln() - mu) / (std::f64::consts::SQRT_2 * sigma);
                let z = (x.ln() - mu) / sigma;
                0.5 * (2.0 / (std::f64::consts::PI * sigma * sigma)).ln() - erfc(t0).ln()
                    - x.ln()
                    - 0.5 * z * z
            }
        }
    }

    /// Truncated density. Returns 0.0 where the log-density underflows.
    pub fn pdf(&self, x: f64) -> Result<f64, DistError> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// Complementary CDF P(X >= x); 1 at x_min, decreasing to 0.
    pub fn ccdf(&self, x: f64) -> Result<f64, DistError> {
        self.validate()?;
        self.check_support(x)?;
        Ok(self.ccdf_unchecked(x))
    }

    pub(crate) fn ccdf_unchecked(&self, x: f64) -> f64 {
        match *self {
            ModelSpec::Pl { alpha, x_min } => (x / x_min).powf(1.0 - alpha),
            ModelSpec::Ple {
                alpha,
                lambda,
                x_min,
            } => {
                let s = 1.0 - alpha;
                let z = (lambda * x).min(special::GAMMA_ARG_MAX);
                let num = ln_upper_incomplete_gamma(s, z)
                    .expect("validated spec keeps arguments in range");
                let den = ln_upper_incomplete_gamma(s, lambda * x_min)
                    .expect("validated spec keeps lambda * x_min in range");
                (num - den).exp().min(1.0)
            }
            ModelSpec::Exp { lambda, x_min } => (-lambda * (x - x_min)).exp(),
            ModelSpec::Stex {
                lambda,
                beta,
                x_min,
            } => (lambda * (x_min.powf(beta) - x.powf(beta))).exp(),
            ModelSpec::Ln { mu, sigma, x_min } | ModelSpec::Lnp { mu, sigma, x_min } => {
                let t0 = (x_min.ln() - mu) / (std::f64::consts::SQRT_2 * sigma);
                let t = (x.ln() - mu) / (std::f64::consts::SQRT_2 * sigma);
                (erfc(t) / erfc(t0)).min(1.0)
            }
        }
    }

    /// CDF of the truncated model: 0 at x_min, monotone to 1.
    pub fn cdf(&self, x: f64) -> Result<f64, DistError> {
        Ok(1.0 - self.ccdf(x)?)
    }

    /// Draw `n` i.i.d. values from the truncated model, deterministic for a
    /// given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleVector, DistError> {
        self.validate()?;
        if n == 0 {
            return Err(DistError::InvalidParameter {
                name: "n",
                reason: "sample size must be >= 1".to_string(),
            });
        }
        sampling::sample(self, n, seed)
    }
}

/// An ordered batch of positive observations (citation counts or normalized
/// scores), each carrying unit weight.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleVector {
    values: Vec<f64>,
}

impl SampleVector {
    /// Wrap a vector of observations; every value must be finite and > 0.
    pub fn new(values: Vec<f64>) -> Result<Self, DistError> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(DistError::InvalidParameter {
                name: "values",
                reason: format!("sample values must be finite and > 0, got {bad}"),
            });
        }
        Ok(SampleVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations at or above the truncation point.
    pub fn tail(&self, x_min: f64) -> SampleVector {
        SampleVector {
            values: self
                .values
                .iter()
                .copied()
                .filter(|&v| v >= x_min)
                .collect(),
        }
    }

    /// Values sorted ascending.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN in SampleVector"));
        v
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}
