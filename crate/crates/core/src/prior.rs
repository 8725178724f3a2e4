//! Independent per-component priors.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{AbcError, Result};
use crate::params::ParamVector;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// One prior component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    /// `ln X ~ Normal(mu, sigma)`.
    LogNormal { mu: f64, sigma: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Marginal::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Marginal::LogNormal { mu, sigma } => {
                mu.is_finite() && sigma.is_finite() && sigma > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(AbcError::InvalidParameter(format!("ill-formed prior {self:?}")))
        }
    }

    /// Closed support `(lower, upper)`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Marginal::Uniform { lo, hi } => (lo, hi),
            Marginal::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Marginal::LogNormal { .. } => (0.0, f64::INFINITY),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                // clamp guards the rounding of lo + (hi - lo) * u onto hi
                (lo + (hi - lo) * u).min(hi)
            }
            Marginal::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Marginal::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        match *self {
            Marginal::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Marginal::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - LN_SQRT_2PI
            }
            Marginal::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lx = x.ln();
                let z = (lx - mu) / sigma;
                -0.5 * z * z - sigma.ln() - LN_SQRT_2PI - lx
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Uniform { lo, hi } => 0.5 * (lo + hi),
            Marginal::Normal { mean, .. } => mean,
            Marginal::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
        }
    }
}

/// Product prior over named components.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    names: Arc<[String]>,
    marginals: Vec<Marginal>,
}

impl Prior {
    pub fn new(components: Vec<(String, Marginal)>) -> Result<Self> {
        if components.is_empty() {
            return Err(AbcError::InvalidParameter("prior has no components".into()));
        }
        for (_, m) in &components {
            m.validate()?;
        }
        let (names, marginals): (Vec<_>, Vec<_>) = components.into_iter().unzip();
        Ok(Self {
            names: names.into(),
            marginals,
        })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    /// Draws a point inside the support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector {
        let values = self.marginals.iter().map(|m| m.sample(rng)).collect();
        ParamVector::new(values, Arc::clone(&self.names)).expect("prior draws are finite")
    }

    /// Log density; `-inf` off the support.
    pub fn log_density(&self, theta: &ParamVector) -> Result<f64> {
        self.log_density_values(theta.values())
    }

    pub fn log_density_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.dim() {
            return Err(AbcError::DimensionMismatch {
                expected: self.dim(),
                actual: values.len(),
            });
        }
        Ok(self
            .marginals
            .iter()
            .zip(values)
            .map(|(m, &x)| m.log_density(x))
            .sum())
    }

    pub fn in_support(&self, theta: &ParamVector) -> bool {
        matches!(self.log_density(theta), Ok(l) if l > f64::NEG_INFINITY)
    }
}
