//! Metropolis-Hastings with a surrogate likelihood.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::approx::SurrogateKind;
use crate::error::{AbcError, Result};
use crate::params::{Dataset, ParamVector};
use crate::prior::Prior;
use crate::rng::{RngStream, StreamRng, CHAIN_STREAM};
use crate::simulator::Simulator;

use super::sample::WeightedSample;
use super::surrogate::{Prepared, SurrogateSetup};

#[derive(Debug, Clone, PartialEq)]
pub struct MhConfig {
    /// Total chain steps `S`, including burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    /// Random-walk standard deviation per component.
    pub proposal_scale: Vec<f64>,
    pub setup: SurrogateSetup,
    pub seed: u64,
}

impl MhConfig {
    pub fn new(iterations: usize, proposal_scale: Vec<f64>, surrogate: SurrogateKind, seed: u64) -> Self {
        Self {
            iterations,
            burn_in: 0,
            proposal_scale,
            setup: SurrogateSetup::new(surrogate),
            seed,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.iterations == 0 || self.burn_in >= self.iterations {
            return Err(AbcError::InvalidParameter(format!(
                "need burn_in < S, got burn_in = {} and S = {}",
                self.burn_in, self.iterations
            )));
        }
        if self.proposal_scale.len() != dim {
            return Err(AbcError::DimensionMismatch {
                expected: dim,
                actual: self.proposal_scale.len(),
            });
        }
        if let Some(s) = self.proposal_scale.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(AbcError::InvalidParameter(format!(
                "proposal scale must be finite and >= 0, got {s}"
            )));
        }
        self.setup.validate()
    }
}

/// States kept after burn-in, row by row, and move counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub states: Vec<f64>,
    pub dim: usize,
    /// Steps at which the chain moved to a different point.
    pub moves: usize,
    pub steps: usize,
}

impl Chain {
    pub fn acceptance_rate(&self) -> f64 {
        self.moves as f64 / self.steps as f64
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }
}

/// Metropolis-Hastings for the target `prior(theta) * w(theta)` with a
/// symmetric proposal and a stochastic, non-negative weight `w`.
///
/// The weight of the current state is kept from when it was accepted and
/// never refreshed, which leaves the target with `E[w]` invariant. A
/// proposal bitwise equal to the current state is accepted in place and
/// does not count as a move. From a state with zero target the first
/// in-support proposal is accepted.
pub fn metropolis_hastings<LP, P, W>(
    init: &[f64],
    steps: usize,
    burn_in: usize,
    rng: &mut StreamRng,
    log_prior: LP,
    mut propose: P,
    mut log_weight: W,
) -> Result<Chain>
where
    LP: Fn(&[f64]) -> f64,
    P: FnMut(&[f64], &mut StreamRng) -> Vec<f64>,
    W: FnMut(&[f64], &mut StreamRng) -> Result<f64>,
{
    let dim = init.len();
    let mut current = init.to_vec();
    let mut current_prior = log_prior(&current);
    if current_prior == f64::NEG_INFINITY {
        return Err(AbcError::InvalidParameter("initial state is outside the prior support".into()));
    }
    let mut current_target = current_prior + log_weight(&current, rng)?;
    let mut states = Vec::with_capacity(dim * steps.saturating_sub(burn_in));
    let mut moves = 0;
    for step in 0..steps {
        let proposal = propose(&current, rng);
        if proposal != current {
            let lp = log_prior(&proposal);
            if lp > f64::NEG_INFINITY {
                let target = lp + log_weight(&proposal, rng)?;
                let accept = if current_target == f64::NEG_INFINITY {
                    true
                } else {
                    let log_ratio = target - current_target;
                    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
                };
                if accept {
                    current = proposal;
                    current_prior = lp;
                    current_target = target;
                    moves += 1;
                }
            }
        }
        debug_assert!(current_prior > f64::NEG_INFINITY);
        if step >= burn_in {
            states.extend_from_slice(&current);
        }
    }
    Ok(Chain {
        states,
        dim,
        moves,
        steps,
    })
}

/// ABC-MH: a Gaussian random walk whose acceptance ratio uses a fresh
/// surrogate fit at each proposal. Every kept state has weight 1.
pub fn run_abc_mh(
    model: &dyn Simulator,
    prior: &Prior,
    observed: &Dataset,
    config: &MhConfig,
    init: &ParamVector,
) -> Result<WeightedSample> {
    config.validate(prior.dim())?;
    if !prior.in_support(init) {
        return Err(AbcError::InvalidParameter("initial state is outside the prior support".into()));
    }
    let prepared = Prepared::new(model, prior, observed, &config.setup, config.seed)?;
    let mut rng = RngStream::new(config.seed, CHAIN_STREAM).rng();
    let names = prior.names().clone();
    let chain = metropolis_hastings(
        init.values(),
        config.iterations,
        config.burn_in,
        &mut rng,
        |t| prior.log_density_values(t).unwrap_or(f64::NEG_INFINITY),
        |t, rng| {
            t.iter()
                .zip(&config.proposal_scale)
                .map(|(x, s)| x + s * rng.sample::<f64, _>(StandardNormal))
                .collect()
        },
        |t, rng| {
            let theta = ParamVector::new(t.to_vec(), names.clone())?;
            Ok(prepared.evaluate(&theta, rng)?.log_weight)
        },
    )?;
    let kept = chain.states.len() / chain.dim;
    let mut sample = WeightedSample::from_log_weights(names, chain.states.clone(), vec![0.0; kept])?;
    sample.epsilon = prepared.epsilon;
    sample.acceptance_rate = Some(chain.acceptance_rate());
    Ok(sample)
}
