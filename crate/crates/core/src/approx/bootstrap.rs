//! Bootstrap likelihood from a two-stage nested bootstrap.

use rand::Rng;

use crate::error::{AbcError, Result};
use crate::params::Dataset;
use crate::rng::StreamRng;
use crate::simulator::PointEstimator;
use crate::summaries::{empirical_quantile, SmoothKernelSpec};

/// Default smoother span (fraction of points in each local fit).
pub const DEFAULT_SPAN: f64 = 0.5;

/// Bandwidth for the second-stage kernel density estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// `0.9 min(sd, IQR / 1.34) K^(-1/5)`.
    Silverman,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSettings {
    /// First-stage resamples.
    pub j: usize,
    /// Second-stage resamples per first-stage resample.
    pub k: usize,
    pub bandwidth: BandwidthRule,
    pub span: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            j: 50,
            k: 1000,
            bandwidth: BandwidthRule::Silverman,
            span: DEFAULT_SPAN,
        }
    }
}

impl BootstrapSettings {
    pub fn validate(&self) -> Result<()> {
        if self.j < 10 {
            return Err(AbcError::InvalidParameter(format!(
                "bootstrap needs J >= 10, got {}",
                self.j
            )));
        }
        if self.k < 100 {
            return Err(AbcError::InvalidParameter(format!(
                "bootstrap needs K >= 100, got {}",
                self.k
            )));
        }
        if !(self.span > 0.0 && self.span <= 1.0) {
            return Err(AbcError::InvalidParameter(format!(
                "smoother span must lie in (0, 1], got {}",
                self.span
            )));
        }
        if let BandwidthRule::Fixed(h) = self.bandwidth {
            if !(h > 0.0) {
                return Err(AbcError::InvalidParameter("fixed bandwidth must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Silverman's rule of thumb; falls back to the standard deviation when
/// the interquartile range is zero. Returns 0 for constant input.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = empirical_quantile(&sorted, 0.75) - empirical_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Local quadratic regression with tricube weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalQuadratic {
    x: Vec<f64>,
    y: Vec<f64>,
    span: f64,
}

/// Value of a fitted log-likelihood curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveValue {
    pub log_value: f64,
    /// The query lay outside the fitted range and the curve was extended
    /// linearly.
    pub extrapolated: bool,
}

impl LocalQuadratic {
    pub fn new(mut points: Vec<(f64, f64)>, span: f64) -> Result<Self> {
        points.retain(|(x, y)| x.is_finite() && y.is_finite());
        if points.len() < 3 {
            return Err(AbcError::InvalidData(
                "smoother needs at least three finite points".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, y) = points.into_iter().unzip();
        Ok(Self { x, y, span })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Local fit at `x0`: `(value, slope)`.
    fn fit_at(&self, x0: f64) -> (f64, f64) {
        let n = self.x.len();
        let q = ((self.span * n as f64).ceil() as usize).clamp(4.min(n), n);
        let mut dist: Vec<f64> = self.x.iter().map(|x| (x - x0).abs()).collect();
        dist.sort_by(f64::total_cmp);
        let dmax = dist[q - 1] * (1.0 + 1e-10);
        if dmax <= 0.0 {
            let (s, c) = self
                .x
                .iter()
                .zip(&self.y)
                .filter(|(x, _)| **x == x0)
                .fold((0.0, 0.0), |(s, c), (_, y)| (s + y, c + 1.0));
            return (s / c, 0.0);
        }
        // weighted normal equations in (1, d, d^2), d = x - x0
        let mut a = [[0.0f64; 3]; 3];
        let mut b = [0.0f64; 3];
        for (xi, yi) in self.x.iter().zip(&self.y) {
            let d = xi - x0;
            let u = d.abs() / dmax;
            if u >= 1.0 {
                continue;
            }
            let w = (1.0 - u * u * u).powi(3);
            let basis = [1.0, d, d * d];
            for r in 0..3 {
                b[r] += w * basis[r] * yi;
                for c in 0..3 {
                    a[r][c] += w * basis[r] * basis[c];
                }
            }
        }
        for order in [3usize, 2, 1] {
            if let Some(sol) = solve_small(&a, &b, order) {
                return (sol[0], if order > 1 { sol[1] } else { 0.0 });
            }
        }
        (f64::NAN, 0.0)
    }

    pub fn eval(&self, x0: f64) -> CurveValue {
        let (lo, hi) = self.range();
        if x0 < lo || x0 > hi {
            let edge = if x0 < lo { lo } else { hi };
            let (v, slope) = self.fit_at(edge);
            return CurveValue {
                log_value: v + slope * (x0 - edge),
                extrapolated: true,
            };
        }
        CurveValue {
            log_value: self.fit_at(x0).0,
            extrapolated: false,
        }
    }
}

/// Gaussian elimination on the leading `order x order` block.
fn solve_small(a: &[[f64; 3]; 3], b: &[f64; 3], order: usize) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for r in 0..order {
        m[r][..order].copy_from_slice(&a[r][..order]);
        m[r][3] = b[r];
    }
    let scale = (0..order).map(|r| a[r][r].abs()).fold(0.0, f64::max);
    for col in 0..order {
        let pivot = (col..order).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        m.swap(col, pivot);
        for r in 0..order {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut out = [0.0; 3];
    for r in 0..order {
        out[r] = m[r][3] / m[r][r];
    }
    Some(out)
}

/// One parameter component of the bootstrap likelihood.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentCurve {
    Smooth(LocalQuadratic),
    /// Zero bootstrap variance: all estimates equal `at`. The likelihood is
    /// a point mass, so the curve is `0` at `at` and `-inf` elsewhere.
    Spike { at: f64 },
}

impl ComponentCurve {
    pub fn eval(&self, x: f64) -> CurveValue {
        match self {
            ComponentCurve::Smooth(s) => s.eval(x),
            ComponentCurve::Spike { at } => CurveValue {
                log_value: if x == *at { 0.0 } else { f64::NEG_INFINITY },
                extrapolated: x != *at,
            },
        }
    }

    pub fn is_spike(&self) -> bool {
        matches!(self, ComponentCurve::Spike { .. })
    }
}

/// Log bootstrap likelihood as the sum of independent per-component curves.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapLikelihood {
    pub estimate: Vec<f64>,
    pub curves: Vec<ComponentCurve>,
    /// First-stage pairs `(theta*_j, log f_hat(theta_hat_n | theta*_j))` per component.
    pub pairs: Vec<Vec<(f64, f64)>>,
}

impl BootstrapLikelihood {
    pub fn is_degenerate(&self) -> bool {
        self.curves.iter().any(ComponentCurve::is_spike)
    }

    pub fn log_likelihood(&self, theta: &[f64]) -> Result<CurveValue> {
        if theta.len() != self.curves.len() {
            return Err(AbcError::DimensionMismatch {
                expected: self.curves.len(),
                actual: theta.len(),
            });
        }
        let mut total = CurveValue {
            log_value: 0.0,
            extrapolated: false,
        };
        for (curve, &x) in self.curves.iter().zip(theta) {
            let v = curve.eval(x);
            total.log_value += v.log_value;
            total.extrapolated |= v.extrapolated;
        }
        Ok(total)
    }
}

fn resample<R: Rng + ?Sized>(from: &[usize], rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    out.extend((0..from.len()).map(|_| from[rng.random_range(0..from.len())]));
}

/// Nested bootstrap: `J` first-stage resamples of the data give
/// `theta*_j`; `K` second-stage resamples of each give `theta**_{j,k}`,
/// whose Epanechnikov density estimate at `theta_hat_n` is paired with
/// `theta*_j`. A local quadratic smoother through the `J` pairs is the
/// log bootstrap likelihood.
pub fn fit_bootstrap_likelihood(
    data: &Dataset,
    estimator: &dyn PointEstimator,
    settings: &BootstrapSettings,
    rng: &mut StreamRng,
) -> Result<BootstrapLikelihood> {
    settings.validate()?;
    let n = data.len();
    let all: Vec<usize> = (0..n).collect();
    let estimate = estimator.estimate(data, &all)?;
    let d = estimate.len();

    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    let mut stage1 = Vec::with_capacity(settings.j);
    let mut stage2: Vec<Vec<Vec<f64>>> = Vec::with_capacity(settings.j);
    for _ in 0..settings.j {
        resample(&all, rng, &mut first);
        stage1.push(estimator.estimate(data, &first)?);
        let inner = (0..settings.k)
            .map(|_| {
                resample(&first, rng, &mut second);
                estimator.estimate(data, &second)
            })
            .collect::<Result<Vec<_>>>()?;
        stage2.push(inner);
    }

    let mut curves = Vec::with_capacity(d);
    let mut all_pairs = Vec::with_capacity(d);
    for c in 0..d {
        let target = estimate[c];
        let constant = stage1.iter().all(|t| t[c] == target)
            && stage2.iter().flatten().all(|t| t[c] == target);
        if constant {
            curves.push(ComponentCurve::Spike { at: target });
            all_pairs.push(Vec::new());
            continue;
        }
        let pairs: Vec<(f64, f64)> = stage1
            .iter()
            .zip(&stage2)
            .map(|(star, inner)| {
                let values: Vec<f64> = inner.iter().map(|t| t[c]).collect();
                let h = match settings.bandwidth {
                    BandwidthRule::Silverman => silverman_bandwidth(&values),
                    BandwidthRule::Fixed(h) => h,
                };
                let log_density = if h > 0.0 {
                    let kernel = SmoothKernelSpec::epanechnikov(h).expect("positive bandwidth");
                    let s: f64 = values.iter().map(|v| kernel.eval(target - v)).sum();
                    (s / (values.len() as f64 * h)).ln()
                } else {
                    f64::NEG_INFINITY
                };
                (star[c], log_density)
            })
            .collect();
        curves.push(ComponentCurve::Smooth(LocalQuadratic::new(pairs.clone(), settings.span)?));
        all_pairs.push(pairs);
    }
    Ok(BootstrapLikelihood {
        estimate,
        curves,
        pairs: all_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::simulator::SampleMean;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn smoother_reproduces_a_parabola() {
        let pts: Vec<(f64, f64)> = (0..30).map(|i| {
            let x = i as f64 / 10.0 - 1.5;
            (x, 2.0 - 3.0 * x * x + x)
        }).collect();
        let s = LocalQuadratic::new(pts, 0.5).unwrap();
        for x in [-1.2, -0.3, 0.0, 0.77, 1.4] {
            let v = s.eval(x);
            assert!(!v.extrapolated);
            assert!((v.log_value - (2.0 - 3.0 * x * x + x)).abs() < 1e-9);
        }
        let out = s.eval(2.0);
        assert!(out.extrapolated);
        // linear continuation from x = 1.4 with slope -6 * 1.4 + 1
        let expected = 2.0 - 3.0 * 1.96 + 1.4 + (-8.4 + 1.0) * 0.6;
        assert!((out.log_value - expected).abs() < 1e-8, "{}", out.log_value);
    }

    #[test]
    fn settings_limits() {
        let mut s = BootstrapSettings::default();
        assert!(s.validate().is_ok());
        s.j = 9;
        assert!(s.validate().is_err());
        s.j = 10;
        s.k = 99;
        assert!(s.validate().is_err());
    }

    #[test]
    fn silverman_rule() {
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let sd = (v.iter().map(|x| (x - 49.5).powi(2)).sum::<f64>() / 99.0).sqrt();
        let iqr = 74.25 - 24.75;
        let expected = 0.9 * sd.min(iqr / 1.34) * 100f64.powf(-0.2);
        assert!((silverman_bandwidth(&v) - expected).abs() < 1e-12);
        assert_eq!(silverman_bandwidth(&[2.0; 10]), 0.0);
    }

    #[test]
    fn constant_data_is_a_spike() {
        let data = Dataset::continuous(vec![3.0; 40]).unwrap();
        let settings = BootstrapSettings { j: 10, k: 100, ..Default::default() };
        let bl = fit_bootstrap_likelihood(&data, &SampleMean, &settings, &mut RngStream::new(1, 0).rng())
            .unwrap();
        assert!(bl.is_degenerate());
        assert_eq!(bl.log_likelihood(&[3.0]).unwrap().log_value, 0.0);
        assert_eq!(bl.log_likelihood(&[3.1]).unwrap().log_value, f64::NEG_INFINITY);
    }

    #[test]
    fn mean_curve_peaks_near_the_sample_mean() {
        let mut rng = RngStream::new(8, 0).rng();
        let y: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mean = y.iter().sum::<f64>() / 200.0;
        let data = Dataset::continuous(y).unwrap();
        let bl = fit_bootstrap_likelihood(
            &data,
            &SampleMean,
            &BootstrapSettings::default(),
            &mut RngStream::new(8, 1).rng(),
        )
        .unwrap();
        let (lo, hi) = match &bl.curves[0] {
            ComponentCurve::Smooth(s) => s.range(),
            _ => panic!("unexpected spike"),
        };
        let grid: Vec<f64> = (0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0).collect();
        let argmax = grid
            .iter()
            .copied()
            .max_by(|a, b| {
                let va = bl.log_likelihood(&[*a]).unwrap().log_value;
                let vb = bl.log_likelihood(&[*b]).unwrap().log_value;
                va.total_cmp(&vb)
            })
            .unwrap();
        assert!((argmax - mean).abs() < 0.15, "argmax {argmax} vs mean {mean}");
    }
}
