use std::sync::Arc;

use crate::error::{AbcError, Result};
use crate::models::mixed::MixedDesign;
use crate::params::Dataset;

/// Largest data set for which the raw data may serve as its own summary.
pub const IDENTITY_MAX_N: usize = 100;

/// `t(y)`: a fixed-length real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryVector(pub Vec<f64>);

impl SummaryVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for SummaryVector {
    fn from(v: Vec<f64>) -> Self {
        SummaryVector(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatisticSpec {
    /// The data themselves (`n <= IDENTITY_MAX_N`).
    Identity,
    /// Order 1 is the mean; order `r >= 2` is the `r`-th central moment
    /// with divisor `n`.
    Moments(Vec<u32>),
    /// Linearly interpolated empirical quantiles.
    Quantiles(Vec<f64>),
    /// Count of agreeing first-order neighbour pairs on a lattice.
    PottsSufficient,
    /// Grand mean, variance of block means, pooled within-block variance,
    /// then the OLS coefficients of the design.
    MixedEffects(Arc<MixedDesign>),
}

pub fn octile_probs() -> Vec<f64> {
    (1..8).map(|i| i as f64 / 8.0).collect()
}

impl StatisticSpec {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticSpec::Identity => "identity",
            StatisticSpec::Moments(_) => "moments",
            StatisticSpec::Quantiles(_) => "quantiles",
            StatisticSpec::PottsSufficient => "potts",
            StatisticSpec::MixedEffects(_) => "mixed",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StatisticSpec::Moments(orders) if orders.is_empty() || orders.contains(&0) => Err(
                AbcError::InvalidParameter("moment orders must be non-empty and >= 1".into()),
            ),
            StatisticSpec::Quantiles(p)
                if p.is_empty() || p.iter().any(|q| !(0.0..=1.0).contains(q)) =>
            {
                Err(AbcError::InvalidParameter(
                    "quantile probabilities must be non-empty and in [0, 1]".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Summary length for data of size `n` (identity depends on `n`).
    pub fn len_for(&self, n: usize) -> usize {
        match self {
            StatisticSpec::Identity => n,
            StatisticSpec::Moments(o) => o.len(),
            StatisticSpec::Quantiles(p) => p.len(),
            StatisticSpec::PottsSufficient => 1,
            StatisticSpec::MixedEffects(d) => 3 + d.n_coefficients(),
        }
    }

    pub fn compute(&self, data: &Dataset) -> Result<SummaryVector> {
        let values = match self {
            StatisticSpec::Identity => {
                if data.len() > IDENTITY_MAX_N {
                    return Err(AbcError::InvalidParameter(format!(
                        "identity statistic needs n <= {IDENTITY_MAX_N}, got {}",
                        data.len()
                    )));
                }
                data.to_reals()
            }
            StatisticSpec::Moments(orders) => {
                let x = self.continuous(data)?;
                moments(x, orders)
            }
            StatisticSpec::Quantiles(probs) => {
                let mut x = self.continuous(data)?.to_vec();
                x.sort_by(f64::total_cmp);
                probs.iter().map(|&p| empirical_quantile(&x, p)).collect()
            }
            StatisticSpec::PottsSufficient => {
                let lattice = data.as_lattice().ok_or(AbcError::IncompatibleStatistic {
                    statistic: "potts",
                    data: data.kind_name(),
                })?;
                vec![lattice.agreement_count() as f64]
            }
            StatisticSpec::MixedEffects(design) => {
                let y = self.continuous(data)?;
                design.summary(y)?
            }
        };
        Ok(SummaryVector(values))
    }

    fn continuous<'a>(&self, data: &'a Dataset) -> Result<&'a [f64]> {
        data.as_continuous().ok_or(AbcError::IncompatibleStatistic {
            statistic: self.name(),
            data: data.kind_name(),
        })
    }
}

fn moments(x: &[f64], orders: &[u32]) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    orders
        .iter()
        .map(|&r| {
            if r == 1 {
                mean
            } else {
                x.iter().map(|v| (v - mean).powi(r as i32)).sum::<f64>() / n
            }
        })
        .collect()
}

/// Quantile of already sorted data by linear interpolation between order
/// statistics at position `p * (n - 1)`.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Lattice;

    fn data(v: &[f64]) -> Dataset {
        Dataset::continuous(v.to_vec()).unwrap()
    }

    #[test]
    fn simple_statistics() {
        let median = StatisticSpec::Quantiles(vec![0.5]);
        assert_eq!(median.compute(&data(&[1.0, 2.0, 3.0])).unwrap().0, vec![2.0]);
        let mean = StatisticSpec::Moments(vec![1]);
        assert_eq!(mean.compute(&data(&[2.0, 4.0])).unwrap().0, vec![3.0]);
        let var = StatisticSpec::Moments(vec![1, 2]);
        assert_eq!(var.compute(&data(&[2.0, 4.0])).unwrap().0, vec![3.0, 1.0]);
    }

    #[test]
    fn potts_statistic_on_uniform_grid() {
        let lattice = Dataset::Lattice(Lattice::new(2, 2, 3, vec![2; 4]).unwrap());
        let t = StatisticSpec::PottsSufficient.compute(&lattice).unwrap();
        assert_eq!(t.0, vec![4.0]);
    }

    #[test]
    fn incompatible_specs() {
        let lattice = Dataset::Lattice(Lattice::new(1, 2, 2, vec![1, 2]).unwrap());
        assert!(matches!(
            StatisticSpec::Moments(vec![1]).compute(&lattice),
            Err(AbcError::IncompatibleStatistic { .. })
        ));
        assert!(StatisticSpec::PottsSufficient.compute(&data(&[1.0])).is_err());
        let big = data(&vec![0.0; IDENTITY_MAX_N + 1]);
        assert!(StatisticSpec::Identity.compute(&big).is_err());
    }

    #[test]
    fn octiles_have_fixed_length_and_are_deterministic() {
        let spec = StatisticSpec::Quantiles(octile_probs());
        let d = data(&[5.0, 1.0, 4.0, 2.0, 3.0, 9.0, 0.5]);
        let a = spec.compute(&d).unwrap();
        let b = spec.compute(&d).unwrap();
        assert_eq!(a.len(), 7);
        assert_eq!(
            a.0.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.0.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert!(a.0.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn quantile_interpolation() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((empirical_quantile(&x, 0.01) - 1.99).abs() < 1e-12);
        assert_eq!(empirical_quantile(&x, 1.0), 100.0);
        assert_eq!(empirical_quantile(&x, 0.0), 1.0);
    }
}
