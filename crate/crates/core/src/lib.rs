//! Likelihood-free Bayesian inference through approximate likelihoods.
//!
//! Six surrogate-likelihood kernels (rejection, kernel smoothing, coupled,
//! synthetic normal, empirical and bootstrap likelihood) share one
//! interface: for a proposed parameter they return a non-negative weight
//! that stands in for the intractable likelihood of the observed data.
//! An importance-sampling driver with the prior as instrumental density,
//! and a Metropolis-Hastings variant, turn these weights into weighted
//! posterior samples.
//!
//! The pure numerical kernels (distances, smoothing kernels, quantile
//! functions, weight normalisation and ESS) are generic over [`Real`]; the
//! aliases below fix them to `f64`, which is what the samplers use.

pub mod approx;
pub mod cli;
pub mod error;
pub mod models;
pub mod params;
pub mod prior;
pub mod real;
pub mod rng;
pub mod samplers;
pub mod simulator;
pub mod special;
pub mod summaries;

pub use error::{AbcError, Result};
pub use params::{Dataset, Lattice, ParamVector};
pub use prior::{Marginal, Prior};
pub use real::Real;
pub use rng::{make_streams, RngStream, StreamRng};
pub use simulator::{Coupling, PointEstimator, Simulator};
pub use summaries::{StatisticSpec, SummaryVector};

pub use approx::{FittedSurrogate, SurrogateKind};
pub use samplers::{run_abc_is, run_abc_mh, MhConfig, RunConfig, ToleranceRule, WeightedSample};

/// Distance between summaries in double precision.
pub type DistanceSpec = summaries::DistanceSpec<f64>;
/// Smoothing kernel in double precision.
pub type SmoothKernelSpec = summaries::SmoothKernelSpec<f64>;
/// g-and-k parameters in double precision.
pub type GkParams = models::GkParams<f64>;

/// Single-precision variants of the scalar-generic types.
pub mod f32 {
    pub type DistanceSpec = crate::summaries::DistanceSpec<f32>;
    pub type SmoothKernelSpec = crate::summaries::SmoothKernelSpec<f32>;
    pub type GkParams = crate::models::GkParams<f32>;
}
