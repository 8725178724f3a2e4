//! Linear mixed-effects model `y_jk = x_jk' beta + b_k + e_jk`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{AbcError, Result};
use crate::params::{Dataset, ParamVector};
use crate::rng::StreamRng;
use crate::simulator::{PointEstimator, Simulator};
use crate::summaries::StatisticSpec;

/// Block layout and fixed-effect design shared by simulator, summary and
/// estimator. Rows are ordered block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedDesign {
    block_sizes: Vec<usize>,
    block_of: Vec<usize>,
    x: DMatrix<f64>,
    /// `(X'X)^{-1} X'`, cached for the summary statistic.
    ols: DMatrix<f64>,
}

impl MixedDesign {
    /// `rows[i]` is the predictor vector of observation `i`.
    pub fn new(block_sizes: Vec<usize>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n: usize = block_sizes.iter().sum();
        if block_sizes.is_empty() || block_sizes.contains(&0) {
            return Err(AbcError::InvalidParameter(
                "every block needs at least one observation".into(),
            ));
        }
        if rows.len() != n {
            return Err(AbcError::DimensionMismatch {
                expected: n,
                actual: rows.len(),
            });
        }
        let p = rows.first().map_or(0, Vec::len);
        if p == 0 || rows.iter().any(|r| r.len() != p) {
            return Err(AbcError::InvalidParameter(
                "design rows must share a non-zero length".into(),
            ));
        }
        let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        let xtx = x.transpose() * &x;
        let chol = xtx
            .clone()
            .cholesky()
            .ok_or_else(|| AbcError::InvalidParameter("design is not full column rank".into()))?;
        if chol.l().diagonal().iter().any(|d| *d < 1e-10 * xtx.norm().sqrt()) {
            return Err(AbcError::InvalidParameter("design is not full column rank".into()));
        }
        let ols = chol.solve(&x.transpose());
        let block_of = block_sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect();
        Ok(Self {
            block_sizes,
            block_of,
            x,
            ols,
        })
    }

    /// Intercept-only design.
    pub fn intercept(block_sizes: Vec<usize>) -> Result<Self> {
        let n = block_sizes.iter().sum();
        Self::new(block_sizes, vec![vec![1.0]; n])
    }

    /// Intercept plus a within-block trend `(j + 1) / J_k - 1/2`.
    pub fn intercept_trend(block_sizes: Vec<usize>) -> Result<Self> {
        let rows = block_sizes
            .iter()
            .flat_map(|&size| (0..size).map(move |j| vec![1.0, (j + 1) as f64 / size as f64 - 0.5]))
            .collect();
        Self::new(block_sizes, rows)
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn n_coefficients(&self) -> usize {
        self.x.ncols()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn block_of(&self, row: usize) -> usize {
        self.block_of[row]
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Grand mean, sample variance of block means, pooled within-block
    /// variance, then the OLS coefficients.
    pub(crate) fn summary(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n() {
            return Err(AbcError::DimensionMismatch {
                expected: self.n(),
                actual: y.len(),
            });
        }
        let n = y.len() as f64;
        let grand = y.iter().sum::<f64>() / n;
        let kb = self.n_blocks();
        let mut sums = vec![0.0; kb];
        for (i, &v) in y.iter().enumerate() {
            sums[self.block_of[i]] += v;
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&self.block_sizes)
            .map(|(s, &m)| s / m as f64)
            .collect();
        let between = if kb > 1 {
            let mm = means.iter().sum::<f64>() / kb as f64;
            means.iter().map(|m| (m - mm).powi(2)).sum::<f64>() / (kb - 1) as f64
        } else {
            0.0
        };
        let within_ss: f64 = y
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - means[self.block_of[i]]).powi(2))
            .sum();
        let dof = self.n().saturating_sub(kb);
        let within = if dof > 0 { within_ss / dof as f64 } else { 0.0 };
        let beta = &self.ols * DVector::from_column_slice(y);
        let mut out = vec![grand, between, within];
        out.extend(beta.iter());
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFamily {
    Normal,
    /// Student-t with `nu` degrees of freedom, scaled by sigma.
    StudentT { nu: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedEffectsParams {
    pub beta: Vec<f64>,
    /// Random-effect standard deviation.
    pub zeta: f64,
    /// Noise scale.
    pub sigma: f64,
}

/// Simulator with `theta = (beta_1..beta_p, zeta, sigma)`; random
/// effects are `Normal(0, zeta^2)`.
#[derive(Debug, Clone)]
pub struct MixedEffectsModel {
    design: Arc<MixedDesign>,
    noise: NoiseFamily,
    names: Arc<[String]>,
    estimator: MomEstimator,
}

impl MixedEffectsModel {
    pub fn new(design: MixedDesign, noise: NoiseFamily) -> Result<Self> {
        if let NoiseFamily::StudentT { nu } = noise {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(AbcError::InvalidParameter(format!(
                    "Student-t degrees of freedom must be > 0, got {nu}"
                )));
            }
        }
        let p = design.n_coefficients();
        let mut names: Vec<String> = (1..=p).map(|i| format!("beta_{i}")).collect();
        names.push("zeta".into());
        names.push("sigma".into());
        let design = Arc::new(design);
        Ok(Self {
            estimator: MomEstimator {
                design: Arc::clone(&design),
            },
            design,
            noise,
            names: names.into(),
        })
    }

    pub fn design(&self) -> &Arc<MixedDesign> {
        &self.design
    }

    pub fn params(&self, theta: &ParamVector) -> Result<MixedEffectsParams> {
        let p = self.design.n_coefficients();
        if theta.dim() != p + 2 {
            return Err(AbcError::DimensionMismatch {
                expected: p + 2,
                actual: theta.dim(),
            });
        }
        let v = theta.values();
        let params = MixedEffectsParams {
            beta: v[..p].to_vec(),
            zeta: v[p],
            sigma: v[p + 1],
        };
        if params.zeta < 0.0 || params.sigma < 0.0 {
            return Err(AbcError::InvalidParameter(
                "variance components must be >= 0".into(),
            ));
        }
        Ok(params)
    }

    pub fn simulate_with(&self, params: &MixedEffectsParams, rng: &mut StreamRng) -> Result<Dataset> {
        let d = &self.design;
        if params.beta.len() != d.n_coefficients() {
            return Err(AbcError::DimensionMismatch {
                expected: d.n_coefficients(),
                actual: params.beta.len(),
            });
        }
        let student = match self.noise {
            NoiseFamily::StudentT { nu } => Some(
                StudentT::new(nu).map_err(|e| AbcError::InvalidParameter(e.to_string()))?,
            ),
            NoiseFamily::Normal => None,
        };
        let effects: Vec<f64> = (0..d.n_blocks())
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                params.zeta * z
            })
            .collect();
        let fixed = d.x() * DVector::from_column_slice(&params.beta);
        let y = (0..d.n())
            .map(|i| {
                let e: f64 = match &student {
                    Some(t) => t.sample(rng),
                    None => StandardNormal.sample(rng),
                };
                fixed[i] + effects[d.block_of(i)] + params.sigma * e
            })
            .collect();
        Ok(Dataset::Continuous(y))
    }
}

impl Simulator for MixedEffectsModel {
    fn name(&self) -> &'static str {
        "mixed_effects"
    }

    fn dim(&self) -> usize {
        self.design.n_coefficients() + 2
    }

    fn param_names(&self) -> Vec<String> {
        self.names.to_vec()
    }

    fn data_size(&self) -> usize {
        self.design.n()
    }

    fn simulate(&self, theta: &ParamVector, rng: &mut StreamRng) -> Result<Dataset> {
        let params = self.params(theta)?;
        self.simulate_with(&params, rng)
    }

    fn default_statistic(&self) -> StatisticSpec {
        StatisticSpec::MixedEffects(Arc::clone(&self.design))
    }

    fn point_estimator(&self) -> Option<&dyn PointEstimator> {
        Some(&self.estimator)
    }
}

/// Method-of-moments estimator: OLS for beta, one-way ANOVA on the OLS
/// residuals for `(zeta, sigma)`.
#[derive(Debug, Clone)]
pub struct MomEstimator {
    design: Arc<MixedDesign>,
}

impl MomEstimator {
    pub fn new(design: Arc<MixedDesign>) -> Self {
        Self { design }
    }
}

impl PointEstimator for MomEstimator {
    fn estimate(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
        let y = data
            .as_continuous()
            .ok_or_else(|| AbcError::InvalidData("mixed-effects data must be continuous".into()))?;
        let d = &self.design;
        let p = d.n_coefficients();
        let m = rows.len();
        let xs = DMatrix::from_fn(m, p, |i, j| d.x()[(rows[i], j)]);
        let ys = DVector::from_iterator(m, rows.iter().map(|&r| y[r]));
        let beta = (xs.transpose() * &xs)
            .cholesky()
            .map(|c| c.solve(&(xs.transpose() * &ys)))
            .ok_or_else(|| AbcError::InvalidData("resampled design is rank deficient".into()))?;
        let resid = &ys - &xs * &beta;

        let kb = d.n_blocks();
        let mut count = vec![0usize; kb];
        let mut sum = vec![0.0; kb];
        for (i, &r) in rows.iter().enumerate() {
            let b = d.block_of(r);
            count[b] += 1;
            sum[b] += resid[i];
        }
        let mean: Vec<f64> = sum
            .iter()
            .zip(&count)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();
        let within_ss: f64 = rows
            .iter()
            .enumerate()
            .map(|(i, &r)| (resid[i] - mean[d.block_of(r)]).powi(2))
            .sum();
        let occupied: Vec<usize> = (0..kb).filter(|&b| count[b] > 0).collect();
        let dof = m.saturating_sub(occupied.len());
        let sigma2 = if dof > 0 { within_ss / dof as f64 } else { 0.0 };
        let zeta2 = if occupied.len() > 1 {
            let mm = occupied.iter().map(|&b| mean[b]).sum::<f64>() / occupied.len() as f64;
            let var_means = occupied.iter().map(|&b| (mean[b] - mm).powi(2)).sum::<f64>()
                / (occupied.len() - 1) as f64;
            let inv_size =
                occupied.iter().map(|&b| 1.0 / count[b] as f64).sum::<f64>() / occupied.len() as f64;
            (var_means - sigma2 * inv_size).max(0.0)
        } else {
            0.0
        };
        let mut out: Vec<f64> = beta.iter().copied().collect();
        out.push(zeta2.sqrt());
        out.push(sigma2.sqrt());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn model() -> MixedEffectsModel {
        MixedEffectsModel::new(MixedDesign::intercept_trend(vec![4; 6]).unwrap(), NoiseFamily::Normal)
            .unwrap()
    }

    #[test]
    fn noise_free_is_the_linear_predictor() {
        let m = model();
        let params = MixedEffectsParams {
            beta: vec![2.0, -1.0],
            zeta: 0.0,
            sigma: 0.0,
        };
        let y = m.simulate_with(&params, &mut RngStream::new(1, 0).rng()).unwrap();
        let expected = m.design().x() * DVector::from_vec(vec![2.0, -1.0]);
        for (a, b) in y.to_reals().iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn block_mean_variance_decomposition() {
        let (zeta, sigma, j) = (0.8_f64, 1.5_f64, 5usize);
        let m = MixedEffectsModel::new(MixedDesign::intercept(vec![j; 3]).unwrap(), NoiseFamily::Normal)
            .unwrap();
        let params = MixedEffectsParams {
            beta: vec![0.0],
            zeta,
            sigma,
        };
        let reps = 10_000;
        let means: Vec<f64> = (0..reps)
            .map(|r| {
                let y = m.simulate_with(&params, &mut RngStream::new(9, r).rng()).unwrap();
                y.to_reals()[..j].iter().sum::<f64>() / j as f64
            })
            .collect();
        let mu = means.iter().sum::<f64>() / reps as f64;
        let var = means.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let expected = zeta * zeta + sigma * sigma / j as f64;
        assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
    }

    #[test]
    fn deterministic_per_stream() {
        let m = model();
        let t = ParamVector::unnamed(vec![1.0, 0.5, 0.3, 0.9]).unwrap();
        let s = RngStream::new(4, 4);
        assert_eq!(m.simulate(&t, &mut s.rng()).unwrap(), m.simulate(&t, &mut s.rng()).unwrap());
        let student = MixedEffectsModel::new(
            MixedDesign::intercept(vec![3; 3]).unwrap(),
            NoiseFamily::StudentT { nu: 4.0 },
        )
        .unwrap();
        let t = ParamVector::unnamed(vec![1.0, 0.5, 0.9]).unwrap();
        assert_eq!(
            student.simulate(&t, &mut s.rng()).unwrap(),
            student.simulate(&t, &mut s.rng()).unwrap()
        );
    }

    #[test]
    fn summary_and_estimator_on_known_data() {
        let design = MixedDesign::intercept(vec![2, 2]).unwrap();
        let y = [1.0, 3.0, 5.0, 7.0];
        let t = design.summary(&y).unwrap();
        // grand 4; block means 2, 6 -> variance 8; within (1+1+1+1)/2 = 2; beta = 4
        assert_eq!(t, vec![4.0, 8.0, 2.0, 4.0]);
        let est = MomEstimator::new(Arc::new(design));
        let e = est.estimate(&Dataset::continuous(y.to_vec()).unwrap(), &[0, 1, 2, 3]).unwrap();
        assert!((e[0] - 4.0).abs() < 1e-12);
        assert!((e[2] - 2f64.sqrt()).abs() < 1e-12);
        assert!((e[1] - (8.0f64 - 2.0 * 0.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let rows = vec![vec![1.0, 2.0]; 4];
        assert!(MixedDesign::new(vec![2, 2], rows).is_err());
        assert!(MixedDesign::intercept(vec![2, 0]).is_err());
    }
}
