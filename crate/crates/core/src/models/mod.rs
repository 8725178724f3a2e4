//! Benchmark simulators and closed-form oracle models.

pub mod bernoulli;
pub mod conjugate;
pub mod gk;
pub mod mixed;
pub mod potts;

pub use bernoulli::BernoulliModel;
pub use conjugate::{conjugate_normal_posterior, ConjugateNormalConfig, ConjugateNormalModel};
pub use gk::{gk_density, gk_quantile, GkModel, GkParams, STANDARD_C};
pub use mixed::{MixedDesign, MixedEffectsModel, MixedEffectsParams, MomEstimator, NoiseFamily};
pub use potts::{gibbs_sample, potts_exact_likelihood, PottsConfig, PottsModel, PottsPartition, DEFAULT_SWEEPS};
