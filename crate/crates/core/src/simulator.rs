//! The generative-model interface.

use crate::error::Result;
use crate::params::{Dataset, ParamVector};
use crate::rng::StreamRng;
use crate::summaries::StatisticSpec;

/// A model we can simulate from but whose likelihood we do not evaluate.
///
/// `simulate` must be a pure function of `theta` and the generator state.
pub trait Simulator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Parameter dimension `d`.
    fn dim(&self) -> usize;

    fn param_names(&self) -> Vec<String>;

    /// Size `n` of each simulated data set.
    fn data_size(&self) -> usize;

    fn simulate(&self, theta: &ParamVector, rng: &mut StreamRng) -> Result<Dataset>;

    /// Statistic used when a run does not choose one.
    fn default_statistic(&self) -> StatisticSpec;

    /// Deterministic coupling `z = f(theta, u)`, if the model has one.
    fn coupling(&self) -> Option<&dyn Coupling> {
        None
    }

    /// Cheap point estimator of `theta`, if the model has one.
    fn point_estimator(&self) -> Option<&dyn PointEstimator> {
        None
    }
}

/// Inverse-CDF style coupling of parameters and uniform draws.
pub trait Coupling: Send + Sync {
    /// Length of one coupling vector `u`.
    fn coupling_len(&self) -> usize;

    /// Draws one coupling vector, consuming the generator exactly as
    /// [`Simulator::simulate`] does.
    fn draw_coupling(&self, rng: &mut StreamRng) -> Vec<f64>;

    fn simulate_coupled(&self, theta: &ParamVector, u: &[f64]) -> Result<Dataset>;
}

/// Point estimator of the parameter from a (resampled) data set.
///
/// `rows` selects observations of `data`, with repetition, so that
/// estimators with structure (e.g. blocks) can see which rows were drawn.
pub trait PointEstimator: Send + Sync {
    fn estimate(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>>;
}

/// Sample mean of continuous data; a one-component estimator.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleMean;

impl PointEstimator for SampleMean {
    fn estimate(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
        let y = data.as_continuous().ok_or_else(|| {
            crate::error::AbcError::InvalidData("sample mean needs continuous data".into())
        })?;
        let sum: f64 = rows.iter().map(|&i| y[i]).sum();
        Ok(vec![sum / rows.len() as f64])
    }
}
