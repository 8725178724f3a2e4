use nalgebra::{DMatrix, DVector};

use crate::error::{AbcError, Result};
use crate::summaries::SummaryVector;

/// Relative ridge added to the synthetic-likelihood covariance.
pub const DEFAULT_RIDGE: f64 = 1e-8;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Normal approximation `(mu_hat, Sigma_hat)` to the summary distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFit {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Maximum-likelihood normal fit to `N >= 2` simulated summaries.
///
/// `Sigma_hat = S / N + ridge * (tr(S / N) / m) * I`, where `S` is the
/// scatter matrix about the mean. When every summary is identical the
/// trace is zero and the ridge is applied to the identity directly.
pub fn fit_synthetic_normal(summaries: &[SummaryVector], ridge: f64) -> Result<SyntheticFit> {
    let n = summaries.len();
    if n < 2 {
        return Err(AbcError::InvalidParameter(format!(
            "synthetic likelihood needs N >= 2 summaries, got {n}"
        )));
    }
    let m = summaries[0].len();
    if m == 0 {
        return Err(AbcError::InvalidParameter("empty summary vector".into()));
    }
    if let Some(bad) = summaries.iter().find(|s| s.len() != m) {
        return Err(AbcError::DimensionMismatch {
            expected: m,
            actual: bad.len(),
        });
    }
    let mut mean = DVector::zeros(m);
    for s in summaries {
        mean += DVector::from_column_slice(s.values());
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(m, m);
    for s in summaries {
        let d = DVector::from_column_slice(s.values()) - &mean;
        cov.syger(1.0, &d, &d, 1.0);
    }
    cov /= n as f64;
    let avg_var = cov.trace() / m as f64;
    let scale = if avg_var > 0.0 && avg_var.is_finite() {
        avg_var
    } else {
        1.0
    };
    for i in 0..m {
        cov[(i, i)] += ridge * scale;
    }
    let fit = SyntheticFit { mean, cov };
    fit.cov.clone().cholesky().ok_or(AbcError::NotPositiveDefinite)?;
    Ok(fit)
}

impl SyntheticFit {
    /// Fit from given moments; `cov` is row-major.
    pub fn from_moments(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let m = mean.len();
        if cov.len() != m || cov.iter().any(|r| r.len() != m) {
            return Err(AbcError::DimensionMismatch {
                expected: m,
                actual: cov.len(),
            });
        }
        Ok(Self {
            mean: DVector::from_vec(mean),
            cov: DMatrix::from_fn(m, m, |i, j| cov[i][j]),
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Log of the normal density at `obs`.
    pub fn log_density(&self, obs: &SummaryVector) -> Result<f64> {
        let m = self.mean.len();
        if obs.len() != m {
            return Err(AbcError::DimensionMismatch {
                expected: m,
                actual: obs.len(),
            });
        }
        let chol = self
            .cov
            .clone()
            .cholesky()
            .ok_or(AbcError::NotPositiveDefinite)?;
        let diff = DVector::from_column_slice(obs.values()) - &self.mean;
        let white = chol
            .l_dirty()
            .solve_lower_triangular(&diff)
            .ok_or(AbcError::NotPositiveDefinite)?;
        let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        Ok(-0.5 * (m as f64 * LN_2PI + log_det + white.norm_squared()))
    }

    /// Normal density at `obs`.
    pub fn density(&self, obs: &SummaryVector) -> Result<f64> {
        self.log_density(obs).map(f64::exp)
    }
}
