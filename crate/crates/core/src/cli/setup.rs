//! Turning a parsed configuration into a model, prior, data and sampler.

use std::path::Path;
use std::sync::Arc;

use crate::approx::SurrogateKind;
use crate::error::{AbcError, Result};
use crate::models::{
    BernoulliModel, ConjugateNormalModel, GkModel, MixedDesign, MixedEffectsModel, PottsModel,
};
use crate::params::{Dataset, Lattice, ParamVector};
use crate::prior::Prior;
use crate::rng::{RngStream, DATA_STREAM};
use crate::samplers::{DistanceRule, MhConfig, RunConfig, SurrogateSetup, ToleranceRule};
use crate::simulator::Simulator;
use crate::summaries::{SmoothKernelSpec, StatisticSpec};

use super::config::{DataSpec, DistanceChoice, Method, ModelSpec, RunFile, SamplerSpec, StatisticChoice};

pub fn build_model(spec: &ModelSpec) -> Result<Box<dyn Simulator>> {
    Ok(match spec {
        ModelSpec::Gk { n, c } => Box::new(GkModel::with_c(*n, *c)?),
        ModelSpec::Potts { rows, cols, k, sweeps } => Box::new(PottsModel::new(*rows, *cols, *k, *sweeps)?),
        ModelSpec::MixedEffects { blocks, trend, noise } => {
            let design = if *trend {
                MixedDesign::intercept_trend(blocks.clone())?
            } else {
                MixedDesign::intercept(blocks.clone())?
            };
            Box::new(MixedEffectsModel::new(design, *noise)?)
        }
        ModelSpec::ConjugateNormal { n, sd } => Box::new(ConjugateNormalModel::new(*n, *sd)?),
        ModelSpec::Bernoulli { n } => Box::new(BernoulliModel::new(*n)?),
    })
}

pub fn build_prior(file: &RunFile) -> Result<Prior> {
    Prior::new(file.prior.clone())
}

/// Parses whitespace-separated observations; lattices are row-major states.
pub fn parse_data(text: &str, model: &ModelSpec) -> Result<Dataset> {
    let mut values = Vec::new();
    for (i, tok) in text.split_whitespace().enumerate() {
        let v: f64 = tok
            .parse()
            .map_err(|_| AbcError::InvalidData(format!("observation {}: cannot parse `{tok}`", i + 1)))?;
        if !v.is_finite() {
            return Err(AbcError::InvalidData(format!("observation {} is not finite", i + 1)));
        }
        values.push(v);
    }
    match *model {
        ModelSpec::Potts { rows, cols, k, .. } => {
            let states = values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v.fract() == 0.0 && v >= 1.0 && v <= k as f64 {
                        Ok(v as u32)
                    } else {
                        Err(AbcError::InvalidData(format!("observation {}: `{v}` is not a state in 1..={k}", i + 1)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Dataset::Lattice(Lattice::new(rows, cols, k, states)?))
        }
        _ => Dataset::continuous(values),
    }
}

/// The observed data: read from a file, or simulated at the configured truth.
pub fn load_data(file: &RunFile, model: &dyn Simulator, config_dir: &Path) -> Result<Dataset> {
    let data = match &file.data {
        DataSpec::File(path) => {
            let path = if path.is_relative() { config_dir.join(path) } else { path.clone() };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| AbcError::InvalidData(format!("cannot read {}: {e}", path.display())))?;
            parse_data(&text, &file.model)?
        }
        DataSpec::Simulated { truth, seed } => {
            let names: Arc<[String]> = model.param_names().into();
            let theta = ParamVector::new(truth.clone(), names)?;
            model.simulate(&theta, &mut RngStream::new(*seed, DATA_STREAM).rng())?
        }
    };
    if data.len() != model.data_size() {
        return Err(AbcError::InvalidData(format!(
            "the {} model expects {} observations, got {}",
            model.name(),
            model.data_size(),
            data.len()
        )));
    }
    Ok(data)
}

fn statistic(choice: &StatisticChoice, model: &ModelSpec) -> Result<Option<StatisticSpec>> {
    Ok(match choice {
        StatisticChoice::Default => None,
        StatisticChoice::Identity => Some(StatisticSpec::Identity),
        StatisticChoice::Moments(o) => Some(StatisticSpec::Moments(o.clone())),
        StatisticChoice::Quantiles(p) => Some(StatisticSpec::Quantiles(p.clone())),
        StatisticChoice::Potts => Some(StatisticSpec::PottsSufficient),
        StatisticChoice::Mixed => {
            let ModelSpec::MixedEffects { blocks, trend, .. } = model else {
                return Err(AbcError::InvalidParameter("the mixed statistic needs the mixed-effects model".into()));
            };
            let design = if *trend {
                MixedDesign::intercept_trend(blocks.clone())?
            } else {
                MixedDesign::intercept(blocks.clone())?
            };
            Some(StatisticSpec::MixedEffects(Arc::new(design)))
        }
    })
}

/// The surrogate part of a run; a fixed tolerance is folded into the kernel.
pub fn surrogate_setup(s: &SamplerSpec, model: &ModelSpec) -> Result<SurrogateSetup> {
    let fixed = match s.tolerance {
        Some(ToleranceRule::Fixed(e)) => e,
        // replaced by the pilot quantile before any weight is computed
        _ => 1.0,
    };
    let kind = match s.method {
        Method::Rejection => SurrogateKind::Rejection { epsilon: fixed },
        Method::Kernel => SurrogateKind::KernelSmooth(SmoothKernelSpec::new(s.kernel, fixed)?),
        Method::Coupled => SurrogateKind::Coupled {
            epsilon: fixed,
            draws: s.coupling_draws,
        },
        Method::Synthetic => SurrogateKind::SyntheticNormal { n: s.n, ridge: s.ridge },
        Method::Empirical => SurrogateKind::Empirical(s.constraints),
        Method::Bootstrap => SurrogateKind::Bootstrap(s.bootstrap),
    };
    let mut setup = SurrogateSetup::new(kind);
    setup.statistic = statistic(&s.statistic, model)?;
    if s.method.uses_distance() {
        setup.distance = match s.distance {
            DistanceChoice::Euclidean => DistanceRule::Euclidean,
            DistanceChoice::Mad => DistanceRule::Mad,
        };
        setup.tolerance = match s.tolerance {
            Some(rule @ ToleranceRule::Quantile { .. }) => Some(rule),
            _ => None,
        };
    }
    setup.validate()?;
    Ok(setup)
}

pub fn is_config(file: &RunFile) -> Result<RunConfig> {
    let s = &file.sampler;
    Ok(RunConfig {
        iterations: s.iterations,
        setup: surrogate_setup(s, &file.model)?,
        seed: s.seed,
        workers: s.workers,
    })
}

pub fn mh_config(file: &RunFile, proposal_scale: &[f64], burn_in: usize) -> Result<MhConfig> {
    let s = &file.sampler;
    Ok(MhConfig {
        iterations: s.iterations,
        burn_in,
        proposal_scale: proposal_scale.to_vec(),
        setup: surrogate_setup(s, &file.model)?,
        seed: s.seed,
    })
}
