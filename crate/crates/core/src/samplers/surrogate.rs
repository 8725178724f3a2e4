//! Resolving a surrogate choice against a model and an observation.

use std::sync::Arc;

use crate::approx::{
    coupled_distances, fit_bootstrap_likelihood, fit_empirical_likelihood, fit_synthetic_normal,
    log_weight_from_surrogate, BootstrapLikelihood, FittedSurrogate, SurrogateKind,
};
use crate::error::{AbcError, Result};
use crate::params::{Dataset, ParamVector};
use crate::prior::Prior;
use crate::rng::{RngStream, StreamRng, BOOTSTRAP_STREAM, COUPLING_STREAM, PILOT_STREAM_BASE};
use crate::simulator::Simulator;
use crate::summaries::{estimate_scales, DistanceSpec, StatisticSpec, SummaryVector};

use super::tolerance::{select_tolerance, ToleranceRule};

/// Pilot simulations behind MAD scales when no quantile pilot is run.
pub const MAD_PILOT: usize = 100;

/// How summaries are compared by the distance-based kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceRule {
    Euclidean,
    /// Scaled Euclidean with per-component MAD scales from the pilot.
    Mad,
    Fixed(DistanceSpec<f64>),
}

/// The surrogate-related part of a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSetup {
    pub surrogate: SurrogateKind,
    /// `None` uses the model's default statistic.
    pub statistic: Option<StatisticSpec>,
    /// Defaults to MAD-scaled Euclidean.
    pub distance: DistanceRule,
    /// Overrides the tolerance of rejection and coupled kernels, or the
    /// bandwidth of the smoothing kernel. `None` keeps the configured value.
    pub tolerance: Option<ToleranceRule>,
}

impl SurrogateSetup {
    pub fn new(surrogate: SurrogateKind) -> Self {
        Self {
            surrogate,
            statistic: None,
            distance: DistanceRule::Mad,
            tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.surrogate.validate()?;
        if let Some(stat) = &self.statistic {
            stat.validate()?;
        }
        if let Some(rule) = &self.tolerance {
            rule.validate()?;
            if !uses_distance(&self.surrogate) {
                return Err(AbcError::InvalidParameter(format!(
                    "a tolerance rule does not apply to the {} kernel",
                    self.surrogate.name()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn uses_distance(kind: &SurrogateKind) -> bool {
    matches!(
        kind,
        SurrogateKind::Rejection { .. } | SurrogateKind::KernelSmooth(_) | SurrogateKind::Coupled { .. }
    )
}

/// Prior-predictive pilot simulations and their distances to the
/// observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotRun {
    /// Pilot parameter draws, row by row.
    pub thetas: Vec<f64>,
    pub distances: Vec<f64>,
    /// The distance used, with MAD scales when requested.
    pub distance: DistanceSpec<f64>,
}

fn pilot_run(
    model: &dyn Simulator,
    prior: &Prior,
    stat: &StatisticSpec,
    obs: &SummaryVector,
    rule: &DistanceRule,
    size: usize,
    seed: u64,
) -> Result<PilotRun> {
    let mut thetas = Vec::with_capacity(size * prior.dim());
    let mut sims = Vec::with_capacity(size);
    for i in 0..size as u64 {
        let mut rng = RngStream::new(seed, PILOT_STREAM_BASE + i).rng();
        let theta = prior.sample(&mut rng);
        sims.push(stat.compute(&model.simulate(&theta, &mut rng)?)?);
        thetas.extend_from_slice(theta.values());
    }
    let distance = match rule {
        DistanceRule::Euclidean => DistanceSpec::Euclidean,
        DistanceRule::Fixed(d) => d.clone(),
        DistanceRule::Mad => {
            let values: Vec<&[f64]> = sims.iter().map(SummaryVector::values).collect();
            DistanceSpec::scaled(estimate_scales(&values)?)?
        }
    };
    let distances = sims
        .iter()
        .map(|t| distance.distance(obs.values(), t.values()))
        .collect::<Result<Vec<_>>>()?;
    Ok(PilotRun {
        thetas,
        distances,
        distance,
    })
}

/// Runs `size` pilot simulations for a distance-based surrogate, as used
/// by quantile tolerances and MAD scaling.
pub fn run_pilot(
    model: &dyn Simulator,
    prior: &Prior,
    observed: &Dataset,
    setup: &SurrogateSetup,
    size: usize,
    seed: u64,
) -> Result<PilotRun> {
    setup.validate()?;
    if !uses_distance(&setup.surrogate) {
        return Err(AbcError::InvalidParameter(format!(
            "a pilot applies to distance-based kernels, not {}",
            setup.surrogate.name()
        )));
    }
    if size == 0 {
        return Err(AbcError::InvalidParameter("pilot size must be >= 1".into()));
    }
    let stat = setup.statistic.clone().unwrap_or_else(|| model.default_statistic());
    let obs = stat.compute(observed)?;
    pilot_run(model, prior, &stat, &obs, &setup.distance, size, seed)
}

/// One surrogate evaluation at a parameter.
pub(crate) struct Evaluation {
    pub log_weight: f64,
    /// Distances behind a distance-based weight (one per simulated or
    /// coupled data set); empty otherwise.
    pub distances: Vec<f64>,
    pub extrapolated: bool,
}

/// A surrogate with every run-level quantity fixed: statistic, distance,
/// tolerance, coupling draws and the bootstrap curve.
pub(crate) struct Prepared<'a> {
    model: &'a dyn Simulator,
    observed: &'a Dataset,
    pub kind: SurrogateKind,
    stat: StatisticSpec,
    dist: DistanceSpec<f64>,
    obs: SummaryVector,
    coupling_draws: Vec<Vec<f64>>,
    bootstrap: Option<Arc<BootstrapLikelihood>>,
    pub pilot_distances: Vec<f64>,
    pub epsilon: Option<f64>,
}

impl<'a> Prepared<'a> {
    pub fn new(
        model: &'a dyn Simulator,
        prior: &Prior,
        observed: &'a Dataset,
        setup: &SurrogateSetup,
        seed: u64,
    ) -> Result<Self> {
        setup.validate()?;
        if prior.dim() != model.dim() {
            return Err(AbcError::DimensionMismatch {
                expected: model.dim(),
                actual: prior.dim(),
            });
        }
        let stat = setup.statistic.clone().unwrap_or_else(|| model.default_statistic());
        let obs = stat.compute(observed)?;
        let mut kind = setup.surrogate.clone();
        let mut dist = match &setup.distance {
            DistanceRule::Fixed(d) => d.clone(),
            _ => DistanceSpec::Euclidean,
        };
        let mut pilot_distances = Vec::new();
        let mut epsilon = None;

        if uses_distance(&kind) {
            let quantile = match setup.tolerance {
                Some(ToleranceRule::Quantile { q, pilot }) => Some((q, pilot)),
                _ => None,
            };
            let needs_pilot = quantile.is_some() || setup.distance == DistanceRule::Mad;
            if needs_pilot {
                // a quantile pilot is reused for the scales
                let size = quantile.map_or(MAD_PILOT, |(_, p)| p);
                let pilot = pilot_run(model, prior, &stat, &obs, &setup.distance, size, seed)?;
                dist = pilot.distance;
                pilot_distances = pilot.distances;
            }
            let chosen = match (setup.tolerance, quantile) {
                (_, Some((q, _))) => Some(select_tolerance(q, &pilot_distances)?),
                (Some(ToleranceRule::Fixed(e)), _) => Some(e),
                _ => None,
            };
            match &mut kind {
                SurrogateKind::Rejection { epsilon: e } | SurrogateKind::Coupled { epsilon: e, .. } => {
                    if let Some(c) = chosen {
                        *e = c;
                    }
                    epsilon = Some(*e);
                }
                SurrogateKind::KernelSmooth(spec) => {
                    if let Some(c) = chosen {
                        if !(c > 0.0) {
                            return Err(AbcError::InvalidParameter(format!(
                                "kernel bandwidth must be > 0, tolerance rule gave {c}"
                            )));
                        }
                        spec.bandwidth = c;
                    }
                    epsilon = Some(spec.bandwidth);
                }
                _ => unreachable!("distance-based kernels only"),
            }
        }

        let mut coupling_draws = Vec::new();
        if let SurrogateKind::Coupled { draws, .. } = kind {
            let coupling = model.coupling().ok_or(AbcError::Unsupported("a coupling"))?;
            let mut rng = RngStream::new(seed, COUPLING_STREAM).rng();
            coupling_draws = (0..draws).map(|_| coupling.draw_coupling(&mut rng)).collect();
        }

        let mut bootstrap = None;
        match &kind {
            SurrogateKind::Bootstrap(settings) => {
                let estimator = model
                    .point_estimator()
                    .ok_or(AbcError::Unsupported("a point estimator"))?;
                let mut rng = RngStream::new(seed, BOOTSTRAP_STREAM).rng();
                let bl = fit_bootstrap_likelihood(observed, estimator, settings, &mut rng)?;
                if bl.curves.len() != model.dim() {
                    return Err(AbcError::DimensionMismatch {
                        expected: model.dim(),
                        actual: bl.curves.len(),
                    });
                }
                bootstrap = Some(Arc::new(bl));
            }
            SurrogateKind::Empirical(constraints) => {
                constraints.validate(model.dim(), observed.len())?;
            }
            _ => {}
        }

        Ok(Self {
            model,
            observed,
            kind,
            stat,
            dist,
            obs,
            coupling_draws,
            bootstrap,
            pilot_distances,
            epsilon,
        })
    }

    pub fn evaluate(&self, theta: &ParamVector, rng: &mut StreamRng) -> Result<Evaluation> {
        let mut distances = Vec::new();
        let mut extrapolated = false;
        let fit = match &self.kind {
            SurrogateKind::Rejection { .. } | SurrogateKind::KernelSmooth(_) => {
                let t = self.stat.compute(&self.model.simulate(theta, rng)?)?;
                let rho = self.dist.distance(self.obs.values(), t.values())?;
                distances.push(rho);
                FittedSurrogate::Distance { rho }
            }
            SurrogateKind::Coupled { epsilon, .. } => {
                distances = coupled_distances(
                    self.model,
                    theta,
                    &self.coupling_draws,
                    &self.obs,
                    &self.stat,
                    &self.dist,
                )?;
                let hits = distances.iter().filter(|&&r| r <= *epsilon).count();
                FittedSurrogate::Coupled {
                    accepted_fraction: hits as f64 / distances.len() as f64,
                }
            }
            SurrogateKind::SyntheticNormal { n, ridge } => {
                let sims = (0..*n)
                    .map(|_| self.stat.compute(&self.model.simulate(theta, rng)?))
                    .collect::<Result<Vec<_>>>()?;
                FittedSurrogate::SyntheticNormal(fit_synthetic_normal(&sims, *ridge)?)
            }
            SurrogateKind::Empirical(constraints) => FittedSurrogate::Empirical(
                fit_empirical_likelihood(self.observed, theta, *constraints)?,
            ),
            SurrogateKind::Bootstrap(_) => {
                let bl = self.bootstrap.as_ref().expect("fitted at preparation");
                extrapolated = bl.log_likelihood(theta.values())?.extrapolated;
                FittedSurrogate::Bootstrap(Arc::clone(bl))
            }
        };
        let log_weight = log_weight_from_surrogate(&self.kind, &fit, theta, &self.obs)?;
        Ok(Evaluation {
            log_weight,
            distances,
            extrapolated,
        })
    }
}
