//! The g-and-k distribution, defined through its quantile function.

use std::sync::Arc;

use rand::distr::Open01;
use rand::Rng;

use crate::error::{AbcError, Result};
use crate::params::{Dataset, ParamVector};
use crate::real::Real;
use crate::rng::StreamRng;
use crate::simulator::{Coupling, Simulator};
use crate::special::{normal_pdf, normal_quantile};
use crate::summaries::{octile_probs, StatisticSpec};

/// Conventional asymmetry constant.
pub const STANDARD_C: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkParams<F: Real = f64> {
    pub a: F,
    pub b: F,
    pub g: F,
    pub k: F,
    pub c: F,
}

impl<F: Real> GkParams<F> {
    /// Parameters with the standard `c = 0.8`.
    pub fn new(a: F, b: F, g: F, k: F) -> Result<Self> {
        Self::with_c(a, b, g, k, F::lit(STANDARD_C))
    }

    pub fn with_c(a: F, b: F, g: F, k: F, c: F) -> Result<Self> {
        let p = Self { a, b, g, k, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.g, self.k, self.c]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.b > F::zero()) || self.g < F::zero() || self.k < F::zero() {
            return Err(AbcError::InvalidParameter(format!(
                "g-and-k needs B > 0, g >= 0, k >= 0 (got A={}, B={}, g={}, k={})",
                self.a, self.b, self.g, self.k
            )));
        }
        Ok(())
    }

    /// Quantile as a function of the normal score `z`.
    #[inline]
    pub fn quantile_from_z(&self, z: F) -> F {
        let half = F::lit(0.5);
        let skew = F::one() + self.c * (self.g * z * half).tanh();
        let tail = if self.k == F::zero() {
            F::one()
        } else {
            (F::one() + z * z).powf(self.k)
        };
        self.a + self.b * skew * z * tail
    }

    /// `dQ/dz`.
    pub fn quantile_slope_z(&self, z: F) -> F {
        let half = F::lit(0.5);
        let two = F::lit(2.0);
        let th = (self.g * z * half).tanh();
        let sech2 = F::one() - th * th;
        let one_z2 = F::one() + z * z;
        let tail = one_z2.powf(self.k);
        let dtail = two * self.k * z * one_z2.powf(self.k - F::one());
        let skew = F::one() + self.c * th;
        let dskew = self.c * self.g * half * sech2;
        self.b * (dskew * z * tail + skew * (tail + z * dtail))
    }
}

/// `A + B (1 + c tanh(g z_u / 2)) z_u (1 + z_u^2)^k`.
pub fn gk_quantile<F: Real>(params: &GkParams<F>, u: F) -> Result<F> {
    if !(u > F::zero() && u < F::one()) {
        return Err(AbcError::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {u}"
        )));
    }
    Ok(params.quantile_from_z(normal_quantile(u)))
}

/// Density at `x`, by inverting the quantile function numerically.
///
/// Slow; intended as a cross-check oracle only.
pub fn gk_density(params: &GkParams<f64>, x: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while params.quantile_from_z(lo) > x && lo > -40.0 {
        lo *= 2.0;
    }
    while params.quantile_from_z(hi) < x && hi < 40.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if params.quantile_from_z(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    normal_pdf(z) / params.quantile_slope_z(z)
}

/// i.i.d. g-and-k observations; `theta = (A, B, g, k)`.
#[derive(Debug, Clone)]
pub struct GkModel {
    n: usize,
    c: f64,
    names: Arc<[String]>,
}

impl GkModel {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_c(n, STANDARD_C)
    }

    pub fn with_c(n: usize, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(AbcError::InvalidParameter("g-and-k needs n >= 1".into()));
        }
        Ok(Self {
            n,
            c,
            names: ["A", "B", "g", "k"].iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn params(&self, theta: &ParamVector) -> Result<GkParams<f64>> {
        if theta.dim() != 4 {
            return Err(AbcError::DimensionMismatch {
                expected: 4,
                actual: theta.dim(),
            });
        }
        let v = theta.values();
        GkParams::with_c(v[0], v[1], v[2], v[3], self.c)
    }
}

impl Simulator for GkModel {
    fn name(&self) -> &'static str {
        "gk"
    }

    fn dim(&self) -> usize {
        4
    }

    fn param_names(&self) -> Vec<String> {
        self.names.to_vec()
    }

    fn data_size(&self) -> usize {
        self.n
    }

    fn simulate(&self, theta: &ParamVector, rng: &mut StreamRng) -> Result<Dataset> {
        let u = self.draw_coupling(rng);
        self.simulate_coupled(theta, &u)
    }

    fn default_statistic(&self) -> StatisticSpec {
        StatisticSpec::Quantiles(octile_probs())
    }

    fn coupling(&self) -> Option<&dyn Coupling> {
        Some(self)
    }
}

impl Coupling for GkModel {
    fn coupling_len(&self) -> usize {
        self.n
    }

    fn draw_coupling(&self, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.n).map(|_| rng.sample::<f64, _>(Open01)).collect()
    }

    fn simulate_coupled(&self, theta: &ParamVector, u: &[f64]) -> Result<Dataset> {
        if u.len() != self.n {
            return Err(AbcError::DimensionMismatch {
                expected: self.n,
                actual: u.len(),
            });
        }
        let p = self.params(theta)?;
        let z = u
            .iter()
            .map(|&ui| gk_quantile(&p, ui))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset::Continuous(z))
    }
}
