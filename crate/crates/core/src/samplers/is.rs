//! Importance sampling with the prior as instrumental density.

use rayon::prelude::*;

use crate::approx::SurrogateKind;
use crate::error::{AbcError, Result};
use crate::params::Dataset;
use crate::prior::Prior;
use crate::rng::RngStream;
use crate::simulator::Simulator;
use crate::summaries::SmoothKernelSpec;

use super::sample::{ToleranceDiagnostic, WeightedSample};
use super::surrogate::{Prepared, SurrogateSetup};
use super::tolerance::{select_tolerance, ToleranceRule};
use super::weights::effective_sample_size;

/// Pilot quantiles at which `diagnostics.csv` reports the ESS.
pub const DIAGNOSTIC_QUANTILES: [f64; 9] = [0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Number of prior draws `S`.
    pub iterations: usize,
    pub setup: SurrogateSetup,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub workers: usize,
}

impl RunConfig {
    pub fn new(iterations: usize, surrogate: SurrogateKind, seed: u64) -> Self {
        Self {
            iterations,
            setup: SurrogateSetup::new(surrogate),
            seed,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(AbcError::InvalidParameter("S must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(AbcError::InvalidParameter("workers must be >= 1".into()));
        }
        self.setup.validate()
    }
}

struct Draw {
    theta: Vec<f64>,
    log_weight: f64,
    distances: Vec<f64>,
    extrapolated: bool,
}

/// ABC importance sampling: for `s = 1..S` draw `theta_s` from the prior,
/// fit the surrogate at `theta_s` and weight the draw by it.
///
/// Iteration `s` uses random stream `s` of `config.seed`, so the result
/// does not depend on how iterations are spread over workers. A run whose
/// weights are all zero is returned with [`WeightedSample::is_degenerate`]
/// set rather than as an error.
pub fn run_abc_is(
    model: &dyn Simulator,
    prior: &Prior,
    observed: &Dataset,
    config: &RunConfig,
) -> Result<WeightedSample> {
    config.validate()?;
    let prepared = Prepared::new(model, prior, observed, &config.setup, config.seed)?;
    let one = |s: usize| -> Result<Draw> {
        let mut rng = RngStream::new(config.seed, s as u64).rng();
        let theta = prior.sample(&mut rng);
        let eval = prepared.evaluate(&theta, &mut rng)?;
        Ok(Draw {
            theta: theta.values().to_vec(),
            log_weight: eval.log_weight,
            distances: eval.distances,
            extrapolated: eval.extrapolated,
        })
    };
    let draws: Vec<Draw> = if config.workers == 1 {
        (0..config.iterations).map(one).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| AbcError::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| (0..config.iterations).into_par_iter().map(one).collect::<Result<_>>())?
    };

    let d = prior.dim();
    let mut values = Vec::with_capacity(d * draws.len());
    let mut log_weights = Vec::with_capacity(draws.len());
    let mut extrapolated = 0;
    for draw in &draws {
        values.extend_from_slice(&draw.theta);
        log_weights.push(draw.log_weight);
        extrapolated += usize::from(draw.extrapolated);
    }
    let mut sample = WeightedSample::from_log_weights(prior.names().clone(), values, log_weights)?;
    sample.epsilon = prepared.epsilon;
    sample.extrapolated = extrapolated;
    if let Some(ToleranceRule::Quantile { .. }) = config.setup.tolerance {
        let distances: Vec<&[f64]> = draws.iter().map(|d| d.distances.as_slice()).collect();
        sample.diagnostics = tolerance_grid(&prepared.kind, &prepared.pilot_distances, &distances)?;
    }
    Ok(sample)
}

/// Accepted count and ESS the run would have had at each pilot quantile
/// of the tolerance, recomputed from the stored distances.
fn tolerance_grid(
    kind: &SurrogateKind,
    pilot: &[f64],
    distances: &[&[f64]],
) -> Result<Vec<ToleranceDiagnostic>> {
    DIAGNOSTIC_QUANTILES
        .iter()
        .map(|&q| {
            let epsilon = select_tolerance(q, pilot)?;
            let smooth = match kind {
                SurrogateKind::KernelSmooth(spec) if epsilon > 0.0 => {
                    Some(SmoothKernelSpec::new(spec.kind, epsilon)?)
                }
                _ => None,
            };
            let weights: Vec<f64> = distances
                .iter()
                .map(|rhos| {
                    let total: f64 = rhos
                        .iter()
                        .map(|&r| match (&smooth, kind) {
                            (Some(k), _) => k.eval(r),
                            (None, SurrogateKind::KernelSmooth(_)) => 0.0,
                            (None, _) => f64::from(u8::from(r <= epsilon)),
                        })
                        .sum();
                    total / rhos.len().max(1) as f64
                })
                .collect();
            Ok(ToleranceDiagnostic {
                quantile: q,
                epsilon,
                accepted: weights.iter().filter(|&&w| w > 0.0).count(),
                ess: effective_sample_size(&weights),
            })
        })
        .collect()
}
