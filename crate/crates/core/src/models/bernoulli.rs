//! Bernoulli toy model used to check the exact-match regime of rejection
//! ABC on discrete data.

use std::sync::Arc;

use rand::Rng;

use crate::error::{AbcError, Result};
use crate::params::{Dataset, ParamVector};
use crate::rng::StreamRng;
use crate::simulator::{PointEstimator, SampleMean, Simulator};
use crate::summaries::StatisticSpec;

/// `n` i.i.d. Bernoulli(p) draws coded 0/1.
#[derive(Debug, Clone)]
pub struct BernoulliModel {
    n: usize,
    names: Arc<[String]>,
}

impl BernoulliModel {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(AbcError::InvalidParameter("Bernoulli model needs n >= 1".into()));
        }
        Ok(Self {
            n,
            names: vec!["p".to_string()].into(),
        })
    }

    /// Exact probability of the observed 0/1 sequence.
    pub fn pmf(&self, p: f64, y: &[f64]) -> f64 {
        y.iter()
            .map(|&v| if v == 1.0 { p } else { 1.0 - p })
            .product()
    }

    fn p(&self, theta: &ParamVector) -> Result<f64> {
        if theta.dim() != 1 {
            return Err(AbcError::DimensionMismatch {
                expected: 1,
                actual: theta.dim(),
            });
        }
        let p = theta.get(0);
        if !(0.0..=1.0).contains(&p) {
            return Err(AbcError::InvalidParameter(format!(
                "success probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(p)
    }
}

impl Simulator for BernoulliModel {
    fn name(&self) -> &'static str {
        "bernoulli"
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
        let p = self.p(theta)?;
        Ok(Dataset::Continuous(
            (0..self.n)
                .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect(),
        ))
    }

    fn default_statistic(&self) -> StatisticSpec {
        StatisticSpec::Identity
    }

    fn point_estimator(&self) -> Option<&dyn PointEstimator> {
        Some(&SampleMean)
    }
}
