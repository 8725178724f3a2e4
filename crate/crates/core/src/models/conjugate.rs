//! Normal data with known variance and a normal prior on the mean: the
//! closed-form posterior is the reference for the samplers.

use std::sync::Arc;

use rand::distr::Open01;
use rand::Rng;

use crate::error::{AbcError, Result};
use crate::params::{Dataset, ParamVector};
use crate::rng::StreamRng;
use crate::simulator::{Coupling, PointEstimator, SampleMean, Simulator};
use crate::special::normal_quantile;
use crate::summaries::StatisticSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateNormalConfig {
    pub prior_mean: f64,
    pub prior_sd: f64,
    pub likelihood_sd: f64,
    pub n: usize,
}

impl ConjugateNormalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.prior_sd > 0.0 && self.likelihood_sd > 0.0) {
            return Err(AbcError::InvalidParameter(
                "conjugate normal standard deviations must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Posterior `(mean, sd)` of the mean given observations `y`.
    pub fn posterior(&self, y: &[f64]) -> Result<(f64, f64)> {
        self.validate()?;
        let prior_prec = self.prior_sd.powi(-2);
        let lik_prec = y.len() as f64 * self.likelihood_sd.powi(-2);
        let prec = prior_prec + lik_prec;
        let sum: f64 = y.iter().sum();
        let mean = (prior_prec * self.prior_mean + sum * self.likelihood_sd.powi(-2)) / prec;
        Ok((mean, prec.sqrt().recip()))
    }
}

/// `conjugateNormalPosterior` for a data set.
pub fn conjugate_normal_posterior(config: &ConjugateNormalConfig, data: &Dataset) -> Result<(f64, f64)> {
    let y = data
        .as_continuous()
        .ok_or_else(|| AbcError::InvalidData("conjugate oracle needs continuous data".into()))?;
    config.posterior(y)
}

/// `y_i ~ Normal(mu, likelihood_sd^2)`, simulated by inverse CDF so that
/// it also offers a coupling.
#[derive(Debug, Clone)]
pub struct ConjugateNormalModel {
    n: usize,
    likelihood_sd: f64,
    names: Arc<[String]>,
}

impl ConjugateNormalModel {
    pub fn new(n: usize, likelihood_sd: f64) -> Result<Self> {
        if n == 0 || !(likelihood_sd > 0.0) {
            return Err(AbcError::InvalidParameter(
                "conjugate normal model needs n >= 1 and sd > 0".into(),
            ));
        }
        Ok(Self {
            n,
            likelihood_sd,
            names: vec!["mu".to_string()].into(),
        })
    }

    pub fn likelihood_sd(&self) -> f64 {
        self.likelihood_sd
    }
}

impl Simulator for ConjugateNormalModel {
    fn name(&self) -> &'static str {
        "conjugate_normal"
    }

    fn dim(&self) -> usize {
        1
    }

    fn param_names(&self) -> Vec<String> {
        self.names.to_vec()
    }

    fn data_size(&self) -> usize {
        self.n
    }

    fn simulate(&self, theta: &ParamVector, rng: &mut StreamRng) -> Result<Dataset> {
        let u = self.draw_coupling(rng);
        self.simulate_coupled(theta, &u)
    }

    fn default_statistic(&self) -> StatisticSpec {
        StatisticSpec::Moments(vec![1])
    }

    fn coupling(&self) -> Option<&dyn Coupling> {
        Some(self)
    }

    fn point_estimator(&self) -> Option<&dyn PointEstimator> {
        Some(&SampleMean)
    }
}

impl Coupling for ConjugateNormalModel {
    fn coupling_len(&self) -> usize {
        self.n
    }

    fn draw_coupling(&self, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.n).map(|_| rng.sample::<f64, _>(Open01)).collect()
    }

    fn simulate_coupled(&self, theta: &ParamVector, u: &[f64]) -> Result<Dataset> {
        if theta.dim() != 1 {
            return Err(AbcError::DimensionMismatch {
                expected: 1,
                actual: theta.dim(),
            });
        }
        if u.len() != self.n {
            return Err(AbcError::DimensionMismatch {
                expected: self.n,
                actual: u.len(),
            });
        }
        let mu = theta.get(0);
        Ok(Dataset::Continuous(
            u.iter()
                .map(|&ui| mu + self.likelihood_sd * normal_quantile(ui))
                .collect(),
        ))
    }
}
