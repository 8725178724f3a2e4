use crate::error::{AbcError, Result};
use crate::params::ParamVector;
use crate::simulator::Simulator;
use crate::summaries::{DistanceSpec, SmoothKernelSpec, StatisticSpec, SummaryVector};

/// `1(rho <= epsilon)`; the boundary is accepted.
#[inline]
pub fn weight_rejection(epsilon: f64, rho: f64) -> f64 {
    if rho <= epsilon {
        1.0
    } else {
        0.0
    }
}

#[inline]
pub fn weight_kernel_smooth(spec: &SmoothKernelSpec<f64>, rho: f64) -> f64 {
    spec.eval(rho)
}

/// Distances between the observation and the coupled data sets
/// `z(theta, u)`, one per coupling draw.
pub fn coupled_distances(
    model: &dyn Simulator,
    theta: &ParamVector,
    u_draws: &[Vec<f64>],
    obs: &SummaryVector,
    stat: &StatisticSpec,
    dist: &DistanceSpec<f64>,
) -> Result<Vec<f64>> {
    let coupling = model.coupling().ok_or(AbcError::Unsupported("a coupling"))?;
    if u_draws.is_empty() {
        return Err(AbcError::InvalidParameter("need at least one coupling draw".into()));
    }
    u_draws
        .iter()
        .map(|u| {
            let z = coupling.simulate_coupled(theta, u)?;
            let t = stat.compute(&z)?;
            dist.distance(obs.values(), t.values())
        })
        .collect()
}

/// Monte Carlo estimate of the rejection kernel marginalised over the
/// coupling variable: the fraction of `u_draws` whose coupled data set
/// lands within `epsilon` of the observation.
pub fn weight_coupled(
    model: &dyn Simulator,
    theta: &ParamVector,
    u_draws: &[Vec<f64>],
    epsilon: f64,
    obs: &SummaryVector,
    stat: &StatisticSpec,
    dist: &DistanceSpec<f64>,
) -> Result<f64> {
    let rho = coupled_distances(model, theta, u_draws, obs, stat, dist)?;
    let hits = rho.iter().filter(|&&r| r <= epsilon).count();
    Ok(hits as f64 / rho.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BernoulliModel, GkModel};
    use crate::rng::RngStream;
    use crate::simulator::Coupling;
    use crate::summaries::octile_probs;

    #[test]
    fn rejection_boundary() {
        assert_eq!(weight_rejection(0.1, 0.05), 1.0);
        assert_eq!(weight_rejection(0.1, 0.1), 1.0);
        assert_eq!(weight_rejection(0.0, 1e-16), 0.0);
        assert_eq!(weight_rejection(f64::INFINITY, 1e300), 1.0);
    }

    #[test]
    fn kernel_smooth_delegates() {
        let e1 = SmoothKernelSpec::epanechnikov(1.0).unwrap();
        let e2 = SmoothKernelSpec::epanechnikov(2.0).unwrap();
        let g = SmoothKernelSpec::gaussian(1.0).unwrap();
        assert_eq!(weight_kernel_smooth(&e1, 0.0), 0.75);
        assert_eq!(weight_kernel_smooth(&e2, 2.0), 0.0);
        // standard normal pdf at 1
        assert!((weight_kernel_smooth(&g, 1.0) - 0.241_970_724_519_143_37).abs() < 1e-15);
    }

    fn gk_setup() -> (GkModel, ParamVector, Vec<f64>, StatisticSpec, DistanceSpec) {
        let m = GkModel::new(40).unwrap();
        let theta = ParamVector::unnamed(vec![3.0, 1.0, 2.0, 0.5]).unwrap();
        let u = m.draw_coupling(&mut RngStream::new(2, 0).rng());
        let stat = StatisticSpec::Quantiles(octile_probs());
        (m, theta, u, stat, DistanceSpec::Euclidean)
    }

    #[test]
    fn coupling_reproduces_its_own_observation() {
        let (m, theta, u, stat, dist) = gk_setup();
        let y = m.simulate_coupled(&theta, &u).unwrap();
        let obs = stat.compute(&y).unwrap();
        let w = weight_coupled(&m, &theta, &[u.clone()], 0.0, &obs, &stat, &dist).unwrap();
        assert_eq!(w, 1.0);
        let other = ParamVector::unnamed(vec![3.5, 1.0, 2.0, 0.5]).unwrap();
        assert_eq!(weight_coupled(&m, &other, &[u], 0.0, &obs, &stat, &dist).unwrap(), 0.0);
    }

    #[test]
    fn infinite_tolerance_accepts_everything() {
        let (m, _, u, stat, dist) = gk_setup();
        let obs = SummaryVector(vec![0.0; 7]);
        let far = ParamVector::unnamed(vec![-50.0, 9.0, 7.0, 3.0]).unwrap();
        let w = weight_coupled(&m, &far, &[u.clone(), u], f64::INFINITY, &obs, &stat, &dist).unwrap();
        assert_eq!(w, 1.0);
    }

    #[test]
    fn median_coupling_gives_constant_data() {
        let (m, theta, _, stat, dist) = gk_setup();
        let u = vec![0.5; 40];
        let z = m.simulate_coupled(&theta, &u).unwrap();
        let t = stat.compute(&z).unwrap();
        assert!(t.values().iter().all(|&v| v == 3.0));
        let obs = SummaryVector(vec![3.0; 7]);
        assert_eq!(weight_coupled(&m, &theta, &[u.clone()], 0.0, &obs, &stat, &dist).unwrap(), 1.0);
        let shifted = SummaryVector(vec![3.1; 7]);
        let rho = (7.0f64 * 0.01).sqrt();
        assert_eq!(
            weight_coupled(&m, &theta, &[u.clone()], rho * 0.999, &shifted, &stat, &dist).unwrap(),
            0.0
        );
        assert_eq!(
            weight_coupled(&m, &theta, &[u], rho * 1.001, &shifted, &stat, &dist).unwrap(),
            1.0
        );
    }

    #[test]
    fn requires_a_coupling() {
        let m = BernoulliModel::new(3).unwrap();
        let t = ParamVector::unnamed(vec![0.5]).unwrap();
        let r = weight_coupled(
            &m,
            &t,
            &[vec![0.5; 3]],
            0.0,
            &SummaryVector(vec![0.0; 3]),
            &StatisticSpec::Identity,
            &DistanceSpec::Euclidean,
        );
        assert!(matches!(r, Err(AbcError::Unsupported(_))));
    }
}
