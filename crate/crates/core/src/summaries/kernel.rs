use crate::error::{AbcError, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `0.75 (1 - u^2)` on `|u| < 1`.
    Epanechnikov,
    /// Standard normal density of `u`.
    Gaussian,
}

/// Smoothing kernel evaluated at `u = rho / bandwidth`.
///
/// The value is not divided by the bandwidth: importance weights are
/// self-normalised, so constant factors cancel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothKernelSpec<F: Real = f64> {
    pub kind: KernelKind,
    pub bandwidth: F,
}

impl<F: Real> SmoothKernelSpec<F> {
    pub fn new(kind: KernelKind, bandwidth: F) -> Result<Self> {
        if !(bandwidth > F::zero()) {
            return Err(AbcError::InvalidParameter(format!(
                "kernel bandwidth must be > 0, got {bandwidth}"
            )));
        }
        Ok(Self { kind, bandwidth })
    }

    pub fn epanechnikov(bandwidth: F) -> Result<Self> {
        Self::new(KernelKind::Epanechnikov, bandwidth)
    }

    pub fn gaussian(bandwidth: F) -> Result<Self> {
        Self::new(KernelKind::Gaussian, bandwidth)
    }

    pub fn eval(&self, rho: F) -> F {
        let u = rho / self.bandwidth;
        match self.kind {
            KernelKind::Epanechnikov => {
                if u.abs() < F::one() {
                    F::lit(0.75) * (F::one() - u * u)
                } else {
                    F::zero()
                }
            }
            KernelKind::Gaussian => crate::special::normal_pdf(u),
        }
    }
}
