//! Surrogate likelihoods.
//!
//! Every kernel maps a proposed parameter to a non-negative weight
//! `K(t(y) | eta_hat(theta))`: either from a distance between observed
//! and simulated summaries (rejection, kernel smoothing, coupled), from a
//! parametric fit to simulated summaries (synthetic normal), or from the
//! observed data alone (empirical and bootstrap likelihood).

mod bootstrap;
mod distance_kernels;
mod empirical;
mod synthetic;

use std::sync::Arc;

pub use bootstrap::{
    fit_bootstrap_likelihood, silverman_bandwidth, BandwidthRule, BootstrapLikelihood,
    BootstrapSettings, ComponentCurve, CurveValue, LocalQuadratic, DEFAULT_SPAN,
};
pub use distance_kernels::{coupled_distances, weight_coupled, weight_kernel_smooth, weight_rejection};
pub use empirical::{fit_empirical_likelihood, ConstraintSet, ElFit, EL_MAX_ITER, EL_TOL};
pub use synthetic::{fit_synthetic_normal, SyntheticFit, DEFAULT_RIDGE};

use crate::error::{AbcError, Result};
use crate::params::ParamVector;
use crate::summaries::{SmoothKernelSpec, SummaryVector};

/// Default number of synthetic data sets per iteration for the synthetic
/// normal likelihood.
pub const DEFAULT_SYNTHETIC_N: usize = 40;

/// Which surrogate likelihood to use, with its tuning constants.
#[derive(Debug, Clone, PartialEq)]
pub enum SurrogateKind {
    /// `1(rho <= epsilon)`.
    Rejection { epsilon: f64 },
    /// `K_delta(rho)` with no tolerance.
    KernelSmooth(SmoothKernelSpec<f64>),
    /// Rejection kernel averaged over `draws` coupling vectors shared by
    /// every parameter in a run.
    Coupled { epsilon: f64, draws: usize },
    /// Multivariate normal fitted to `n` simulated summaries.
    SyntheticNormal { n: usize, ridge: f64 },
    Empirical(ConstraintSet),
    Bootstrap(BootstrapSettings),
}

impl SurrogateKind {
    pub fn name(&self) -> &'static str {
        match self {
            SurrogateKind::Rejection { .. } => "rejection",
            SurrogateKind::KernelSmooth(_) => "kernel",
            SurrogateKind::Coupled { .. } => "coupled",
            SurrogateKind::SyntheticNormal { .. } => "synthetic",
            SurrogateKind::Empirical(_) => "empirical",
            SurrogateKind::Bootstrap(_) => "bootstrap",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(AbcError::InvalidParameter(msg));
        match self {
            SurrogateKind::Rejection { epsilon } | SurrogateKind::Coupled { epsilon, .. }
                if epsilon.is_nan() || *epsilon < 0.0 =>
            {
                bad(format!("tolerance must be >= 0, got {epsilon}"))
            }
            SurrogateKind::Coupled { draws: 0, .. } => bad("coupling draws M must be >= 1".into()),
            SurrogateKind::KernelSmooth(k) if !(k.bandwidth > 0.0) => {
                bad("kernel bandwidth must be > 0".into())
            }
            SurrogateKind::SyntheticNormal { n, .. } if *n < 2 => bad("N >= 2 required".into()),
            SurrogateKind::SyntheticNormal { ridge, .. } if !(*ridge >= 0.0) => {
                bad("ridge must be >= 0".into())
            }
            SurrogateKind::Bootstrap(s) => s.validate(),
            _ => Ok(()),
        }
    }

    /// Synthetic data sets simulated per iteration.
    pub fn synthetic_sets(&self) -> usize {
        match self {
            SurrogateKind::Rejection { .. } | SurrogateKind::KernelSmooth(_) => 1,
            SurrogateKind::SyntheticNormal { n, .. } => *n,
            SurrogateKind::Coupled { .. }
            | SurrogateKind::Empirical(_)
            | SurrogateKind::Bootstrap(_) => 0,
        }
    }
}

/// The per-parameter estimate `eta_hat` produced by a fit.
#[derive(Debug, Clone)]
pub enum FittedSurrogate {
    /// Distance between observed and simulated summaries (rejection and
    /// kernel smoothing).
    Distance { rho: f64 },
    /// Fraction of coupling draws within tolerance.
    Coupled { accepted_fraction: f64 },
    SyntheticNormal(SyntheticFit),
    Empirical(ElFit),
    /// Run-level bootstrap likelihood curve, evaluated at the parameter.
    Bootstrap(Arc<BootstrapLikelihood>),
}

/// Log of the importance weight; `-inf` for a zero weight.
pub fn log_weight_from_surrogate(
    kind: &SurrogateKind,
    fit: &FittedSurrogate,
    theta: &ParamVector,
    obs: &SummaryVector,
) -> Result<f64> {
    let mismatch = || AbcError::KindMismatch(kind.name());
    let w = match (kind, fit) {
        (SurrogateKind::Rejection { epsilon }, FittedSurrogate::Distance { rho }) => {
            weight_rejection(*epsilon, *rho).ln()
        }
        (SurrogateKind::KernelSmooth(spec), FittedSurrogate::Distance { rho }) => {
            weight_kernel_smooth(spec, *rho).ln()
        }
        (SurrogateKind::Coupled { .. }, FittedSurrogate::Coupled { accepted_fraction }) => {
            accepted_fraction.ln()
        }
        (SurrogateKind::SyntheticNormal { .. }, FittedSurrogate::SyntheticNormal(f)) => {
            f.log_density(obs)?
        }
        (SurrogateKind::Empirical(_), FittedSurrogate::Empirical(f)) => f.log_el,
        (SurrogateKind::Bootstrap(_), FittedSurrogate::Bootstrap(bl)) => {
            bl.log_likelihood(theta.values())?.log_value
        }
        _ => return Err(mismatch()),
    };
    Ok(if w.is_nan() { f64::NEG_INFINITY } else { w })
}

/// Importance weight `>= 0`; log-domain values that underflow give 0.
pub fn weight_from_surrogate(
    kind: &SurrogateKind,
    fit: &FittedSurrogate,
    theta: &ParamVector,
    obs: &SummaryVector,
) -> Result<f64> {
    log_weight_from_surrogate(kind, fit, theta, obs).map(f64::exp)
}
