//! Summary statistics, distances between summaries, scale estimation and
//! the smoothing kernels used by the distance-based surrogates.

mod distance;
mod kernel;
mod statistic;

pub use distance::{estimate_scales, DistanceSpec, MIN_PILOTS, SCALE_FLOOR};
pub use kernel::{KernelKind, SmoothKernelSpec};
pub use statistic::{
    empirical_quantile, octile_probs, StatisticSpec, SummaryVector, IDENTITY_MAX_N,
};
