use crate::error::{AbcError, Result};
use crate::real::Real;

/// Smallest scale returned by [`estimate_scales`].
pub const SCALE_FLOOR: f64 = 1e-12;
/// Minimum number of pilot summaries for scale estimation.
pub const MIN_PILOTS: usize = 20;

/// Distance between two summary vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceSpec<F: Real = f64> {
    Euclidean,
    /// Euclidean distance after dividing each component by `scale[i]`.
    ScaledEuclidean(Vec<F>),
}

impl<F: Real> DistanceSpec<F> {
    pub fn scaled(scale: Vec<F>) -> Result<Self> {
        if scale.iter().any(|s| !(s.is_finite() && *s > F::zero())) {
            return Err(AbcError::InvalidParameter(
                "distance scales must be finite and strictly positive".into(),
            ));
        }
        Ok(DistanceSpec::ScaledEuclidean(scale))
    }

    pub fn distance(&self, a: &[F], b: &[F]) -> Result<F> {
        if a.len() != b.len() {
            return Err(AbcError::DimensionMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        let sq = match self {
            DistanceSpec::Euclidean => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y) * (x - y))
                .fold(F::zero(), |acc, v| acc + v),
            DistanceSpec::ScaledEuclidean(scale) => {
                if scale.len() != a.len() {
                    return Err(AbcError::DimensionMismatch {
                        expected: scale.len(),
                        actual: a.len(),
                    });
                }
                a.iter()
                    .zip(b)
                    .zip(scale)
                    .map(|((&x, &y), &s)| {
                        let d = (x - y) / s;
                        d * d
                    })
                    .fold(F::zero(), |acc, v| acc + v)
            }
        };
        Ok(sq.sqrt())
    }
}

/// Per-component median absolute deviation of pilot summaries, floored at
/// [`SCALE_FLOOR`].
pub fn estimate_scales<F: Real, S: AsRef<[F]>>(sims: &[S]) -> Result<Vec<F>> {
    if sims.len() < MIN_PILOTS {
        return Err(AbcError::TooFewPilots {
            required: MIN_PILOTS,
            actual: sims.len(),
        });
    }
    let m = sims[0].as_ref().len();
    if let Some(bad) = sims.iter().find(|s| s.as_ref().len() != m) {
        return Err(AbcError::DimensionMismatch {
            expected: m,
            actual: bad.as_ref().len(),
        });
    }
    let floor = F::lit(SCALE_FLOOR);
    let mut column = Vec::with_capacity(sims.len());
    let scales = (0..m)
        .map(|j| {
            column.clear();
            column.extend(sims.iter().map(|s| s.as_ref()[j]));
            let med = median(&mut column);
            for v in column.iter_mut() {
                *v = (*v - med).abs();
            }
            let mad = median(&mut column);
            if mad.is_finite() && mad > floor {
                mad
            } else {
                floor
            }
        })
        .collect();
    Ok(scales)
}

fn median<F: Real>(v: &mut [F]) -> F {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * F::lit(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_distances() {
        let e = DistanceSpec::<f64>::Euclidean;
        assert_eq!(e.distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let s = DistanceSpec::scaled(vec![2.0, 1.0]).unwrap();
        assert!((s.distance(&[0.0, 0.0], &[4.0, 3.0]).unwrap() - 13f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(e.distance(&[0.0], &[0.0, 1.0]).is_err());
        assert!(DistanceSpec::scaled(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn single_precision_distance() {
        let e = DistanceSpec::<f32>::Euclidean;
        assert_eq!(e.distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0f32);
    }

    #[test]
    fn scales() {
        let same: Vec<Vec<f64>> = vec![vec![1.0, -4.0]; 25];
        assert_eq!(estimate_scales(&same).unwrap(), vec![SCALE_FLOOR; 2]);
        // 1..5 repeated: MAD of {1,2,3,4,5} is 1
        let cycle: Vec<Vec<f64>> = (0..25).map(|i| vec![(i % 5 + 1) as f64]).collect();
        assert_eq!(estimate_scales(&cycle).unwrap(), vec![1.0]);
        let few: Vec<Vec<f64>> = vec![vec![1.0]; 19];
        assert!(matches!(
            estimate_scales(&few),
            Err(AbcError::TooFewPilots { required: 20, actual: 19 })
        ));
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0..100.0f64, 3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn metric_axioms(a in vec3(), b in vec3(), c in vec3(),
                         scale in prop::collection::vec(0.01..10.0f64, 3)) {
            for spec in [DistanceSpec::Euclidean, DistanceSpec::scaled(scale.clone()).unwrap()] {
                let ab = spec.distance(&a, &b).unwrap();
                let ba = spec.distance(&b, &a).unwrap();
                let bc = spec.distance(&b, &c).unwrap();
                let ac = spec.distance(&a, &c).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, ba);
                prop_assert!(ac <= ab + bc + 1e-9 * (1.0 + ab + bc));
                prop_assert_eq!(spec.distance(&a, &a).unwrap(), 0.0);
                prop_assert_eq!(ab == 0.0, a == b);
            }
        }

        #[test]
        fn scales_are_positive(rows in prop::collection::vec(vec3(), 20..60)) {
            let s = estimate_scales(&rows).unwrap();
            prop_assert!(s.iter().all(|&v| v > 0.0));
        }
    }
}
