use nalgebra::{DMatrix, DVector};

use crate::error::{AbcError, Result};
use crate::params::{Dataset, ParamVector};

/// Newton iterations before the program is declared infeasible.
pub const EL_MAX_ITER: usize = 100;
/// Gradient-norm tolerance on the dual.
pub const EL_TOL: f64 = 1e-10;

/// Moment constraints `E[h(Y, theta)] = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSet {
    /// `h = y - theta_1`.
    Mean,
    /// `h = (y - theta_1, (y - theta_1)^2 - theta_2)`.
    MeanVariance,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        match self {
            ConstraintSet::Mean => 1,
            ConstraintSet::MeanVariance => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintSet::Mean => "mean",
            ConstraintSet::MeanVariance => "mean_var",
        }
    }

    /// Checks `#constraints <= d` and `#constraints <= n - 1`.
    pub fn validate(&self, d: usize, n: usize) -> Result<()> {
        let q = self.len();
        if q > d || q + 1 > n {
            return Err(AbcError::InvalidParameter(format!(
                "{q} moment constraints need d >= {q} and n >= {} (d = {d}, n = {n})",
                q + 1
            )));
        }
        Ok(())
    }

    fn eval(&self, y: f64, theta: &[f64], out: &mut [f64]) {
        let r = y - theta[0];
        out[0] = r;
        if let ConstraintSet::MeanVariance = self {
            out[1] = r * r - theta[1];
        }
    }
}

/// Profile weights and log empirical likelihood at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct ElFit {
    pub p: Vec<f64>,
    pub log_el: f64,
    pub lambda: Vec<f64>,
    pub iterations: usize,
}

impl ElFit {
    /// Result when zero is not inside the convex hull of the constraint
    /// values: all weights zero, `log_el = -inf`.
    pub fn infeasible(n: usize) -> Self {
        Self {
            p: vec![0.0; n],
            log_el: f64::NEG_INFINITY,
            lambda: Vec::new(),
            iterations: 0,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.log_el > f64::NEG_INFINITY
    }
}

/// Maximises `prod p_i` subject to `sum p_i = 1`, `sum p_i h(y_i, theta) = 0`.
///
/// Solved through the Lagrange dual: `p_i = 1 / (n (1 + lambda' h_i))`
/// where `lambda` maximises `sum log(1 + lambda' h_i)`, found by Newton's
/// method with step halving. Infeasibility is reported through
/// [`ElFit::infeasible`], not as an error.
pub fn fit_empirical_likelihood(
    data: &Dataset,
    theta: &ParamVector,
    constraints: ConstraintSet,
) -> Result<ElFit> {
    let y = data
        .as_continuous()
        .ok_or_else(|| AbcError::InvalidData("empirical likelihood needs continuous data".into()))?;
    let n = y.len();
    constraints.validate(theta.dim(), n)?;
    let q = constraints.len();
    let mut h = DMatrix::zeros(n, q);
    let mut row = vec![0.0; q];
    for (i, &yi) in y.iter().enumerate() {
        constraints.eval(yi, theta.values(), &mut row);
        for j in 0..q {
            h[(i, j)] = row[j];
        }
    }
    Ok(solve_dual(&h))
}

/// Newton solve of the dual for constraint matrix `h` (`n x q`).
pub(crate) fn solve_dual(h: &DMatrix<f64>) -> ElFit {
    let (n, q) = h.shape();
    let nf = n as f64;
    let infeasible = ElFit::infeasible(n);

    // 0 must lie strictly between the extremes of every coordinate
    for j in 0..q {
        let col = h.column(j);
        if col.min() >= 0.0 || col.max() <= 0.0 {
            return infeasible;
        }
    }

    let objective = |lambda: &DVector<f64>| -> Option<f64> {
        let w = h * lambda;
        let mut total = 0.0;
        for &wi in w.iter() {
            let v = 1.0 + wi;
            // keeps every p_i inside [0, 1]
            if v <= 1.0 / nf {
                return None;
            }
            total += v.ln();
        }
        Some(total)
    };

    let mut lambda = DVector::zeros(q);
    let mut current = 0.0f64;
    let mut iterations = 0;
    for it in 0..EL_MAX_ITER {
        iterations = it + 1;
        let w = h * &lambda;
        let mut grad = DVector::zeros(q);
        let mut info = DMatrix::zeros(q, q);
        for i in 0..n {
            let denom = 1.0 + w[i];
            let hi = h.row(i).transpose();
            grad += &hi / denom;
            info += &hi * hi.transpose() / (denom * denom);
        }
        if grad.norm() < EL_TOL {
            break;
        }
        let step = match info.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => match info.clone().lu().solve(&grad) {
                Some(s) => s,
                None => return infeasible,
            },
        };
        // near the optimum the gain of a full step is below rounding, so
        // a step is only rejected when it clearly decreases the objective
        let slack = 1e-12 * (1.0 + current.abs());
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-30 {
            let candidate = &lambda + &step * t;
            if let Some(value) = objective(&candidate) {
                if value >= current - slack {
                    lambda = candidate;
                    current = value;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }

    let w = h * &lambda;
    let p: Vec<f64> = w.iter().map(|wi| 1.0 / (nf * (1.0 + wi))).collect();
    let sum: f64 = p.iter().sum();
    let mut moment = DVector::<f64>::zeros(q);
    for (i, pi) in p.iter().enumerate() {
        moment += h.row(i).transpose() * *pi;
    }
    let scale = h.amax().max(1.0);
    // a diverging lambda (zero outside the hull) also drives the gradient
    // to zero, so feasibility is judged on the recovered weights. The sum
    // residual is lambda' * moment, so it grows with |lambda|.
    if (sum - 1.0).abs() > 1e-8
        || moment.amax() > 1e-8 * scale
        || p.iter().any(|&pi| !(0.0..=1.0).contains(&pi))
    {
        return infeasible;
    }
    let p: Vec<f64> = p.into_iter().map(|pi| pi / sum).collect();
    let log_el = p.iter().map(|pi| pi.ln()).sum();
    ElFit {
        p,
        log_el,
        lambda: lambda.iter().copied().collect(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn data(v: &[f64]) -> Dataset {
        Dataset::continuous(v.to_vec()).unwrap()
    }

    fn th(v: &[f64]) -> ParamVector {
        ParamVector::unnamed(v.to_vec()).unwrap()
    }

    #[test]
    fn sample_mean_is_the_unconstrained_optimum() {
        let y = [1.0, 4.0, 2.5, 7.0, -3.0];
        let mean = y.iter().sum::<f64>() / 5.0;
        let fit = fit_empirical_likelihood(&data(&y), &th(&[mean]), ConstraintSet::Mean).unwrap();
        for p in &fit.p {
            assert!((p - 0.2).abs() < 1e-12);
        }
        assert!((fit.log_el + 5.0 * 5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn outside_the_hull_is_infeasible() {
        let fit = fit_empirical_likelihood(&data(&[0.5, 1.0, 2.0]), &th(&[-1.0]), ConstraintSet::Mean)
            .unwrap();
        assert_eq!(fit.log_el, f64::NEG_INFINITY);
        assert!(!fit.is_feasible());
        // on the hull boundary
        let fit = fit_empirical_likelihood(&data(&[0.5, 1.0, 2.0]), &th(&[2.0]), ConstraintSet::Mean)
            .unwrap();
        assert!(!fit.is_feasible());
    }

    #[test]
    fn matches_a_line_search_over_the_feasible_segment() {
        // p = (t - 1/2, 3/2 - 2t, t) for t in (1/2, 3/4) satisfies both constraints
        let fit =
            fit_empirical_likelihood(&data(&[1.0, 2.0, 3.0]), &th(&[2.5]), ConstraintSet::Mean).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0);
        let steps = 2_000_000;
        for i in 1..steps {
            let t = 0.5 + 0.25 * i as f64 / steps as f64;
            let v = (t - 0.5).ln() + (1.5 - 2.0 * t).ln() + t.ln();
            if v > best.0 {
                best = (v, t);
            }
        }
        let t = best.1;
        let expected = [t - 0.5, 1.5 - 2.0 * t, t];
        for (p, e) in fit.p.iter().zip(expected) {
            assert!((p - e).abs() < 1e-4, "{:?} vs {expected:?}", fit.p);
        }
        assert!((fit.log_el - best.0).abs() < 1e-8);
    }

    #[test]
    fn constraint_count_limits() {
        let d = data(&[1.0, 2.0]);
        assert!(fit_empirical_likelihood(&d, &th(&[1.5]), ConstraintSet::MeanVariance).is_err());
        assert!(fit_empirical_likelihood(&d, &th(&[1.5, 0.2]), ConstraintSet::MeanVariance).is_err());
        assert!(fit_empirical_likelihood(&data(&[1.0]), &th(&[1.0]), ConstraintSet::Mean).is_err());
    }

    /// Zero lies in the interior of the hull of `pts` iff no closed
    /// half-plane through the origin contains every point. Candidate
    /// separating directions are perpendicular to some point or on a
    /// fine angular grid.
    fn origin_strictly_inside(pts: &[[f64; 2]]) -> bool {
        let mut dirs: Vec<[f64; 2]> = (0..3600)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 3600.0;
                [a.cos(), a.sin()]
            })
            .collect();
        for p in pts {
            dirs.push([-p[1], p[0]]);
            dirs.push([p[1], -p[0]]);
        }
        !dirs
            .iter()
            .any(|d| pts.iter().all(|p| d[0] * p[0] + d[1] * p[1] >= -1e-12))
    }

    #[test]
    fn nearly_collinear_three_points() {
        let y = [-1.9247500816331402, -1.7261142610164908, 1.847528906799821];
        let (mu, var) = (0.9809812686122041, 2.5163999741439596);
        let fit = fit_empirical_likelihood(&data(&y), &th(&[mu, var]), ConstraintSet::MeanVariance)
            .unwrap();
        // three points, three equations: the weights are determined exactly
        let expected = [0.22763983, 0.00219012, 0.77017005];
        assert!(fit.is_feasible());
        for (p, e) in fit.p.iter().zip(expected) {
            assert!((p - e).abs() < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn feasibility_matches_hull(
            y in prop::collection::vec(-3.0..3.0f64, 3..=8),
            mu in -3.0..3.0f64,
            var in 0.01..4.0f64,
        ) {
            let fit = fit_empirical_likelihood(&data(&y), &th(&[mu, var]), ConstraintSet::MeanVariance)
                .unwrap();
            let pts: Vec<[f64; 2]> = y.iter().map(|&v| [v - mu, (v - mu).powi(2) - var]).collect();
            prop_assert_eq!(fit.is_feasible(), origin_strictly_inside(&pts));
            if fit.is_feasible() {
                let sum: f64 = fit.p.iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-10);
                let m1: f64 = fit.p.iter().zip(&pts).map(|(p, h)| p * h[0]).sum();
                let m2: f64 = fit.p.iter().zip(&pts).map(|(p, h)| p * h[1]).sum();
                prop_assert!(m1.abs() < 1e-8 && m2.abs() < 1e-8);
                prop_assert!(fit.p.iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
    }
}
