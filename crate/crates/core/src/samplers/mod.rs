//! Importance-sampling and Metropolis-Hastings drivers, weight
//! normalisation, effective sample size, tolerance selection and
//! posterior summaries.

mod is;
mod mh;
mod sample;
mod surrogate;
mod tolerance;
mod weights;

pub use is::{run_abc_is, RunConfig, DIAGNOSTIC_QUANTILES};
pub use mh::{metropolis_hastings, run_abc_mh, Chain, MhConfig};
pub use sample::{
    posterior_expectation, posterior_mean, posterior_quantiles, posterior_sd, ToleranceDiagnostic,
    WeightedSample,
};
pub use surrogate::{run_pilot, DistanceRule, PilotRun, SurrogateSetup, MAD_PILOT};
pub use tolerance::{select_tolerance, ToleranceRule, DEFAULT_PILOT};
pub use weights::{effective_sample_size, normalize_log_weights, normalize_weights};
