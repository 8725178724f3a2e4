use crate::error::{AbcError, Result};
use crate::summaries::empirical_quantile;

/// Default number of prior-predictive pilot simulations.
pub const DEFAULT_PILOT: usize = 1000;

/// How the tolerance (rejection and coupled `epsilon`, kernel bandwidth
/// `delta`) is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToleranceRule {
    Fixed(f64),
    /// The `q`-quantile of distances from `pilot` prior-predictive
    /// simulations to the observation.
    Quantile { q: f64, pilot: usize },
}

impl ToleranceRule {
    pub fn quantile(q: f64) -> Self {
        ToleranceRule::Quantile { q, pilot: DEFAULT_PILOT }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ToleranceRule::Fixed(e) if e.is_nan() || e < 0.0 => Err(AbcError::InvalidParameter(
                format!("tolerance must be >= 0, got {e}"),
            )),
            ToleranceRule::Quantile { q, .. } if !(q > 0.0 && q <= 1.0) => Err(
                AbcError::InvalidParameter(format!("tolerance quantile must lie in (0, 1], got {q}")),
            ),
            ToleranceRule::Quantile { pilot: 0, .. } => {
                Err(AbcError::InvalidParameter("pilot size must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// The `q`-th empirical quantile (linear interpolation) of the pilot
/// distances.
pub fn select_tolerance(q: f64, pilot_distances: &[f64]) -> Result<f64> {
    if pilot_distances.is_empty() {
        return Err(AbcError::InvalidParameter("empty pilot".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(AbcError::InvalidParameter(format!(
            "tolerance quantile must lie in (0, 1], got {q}"
        )));
    }
    if pilot_distances.iter().any(|d| d.is_nan()) {
        return Err(AbcError::InvalidData("pilot distance is NaN".into()));
    }
    let mut sorted = pilot_distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(empirical_quantile(&sorted, q))
}
