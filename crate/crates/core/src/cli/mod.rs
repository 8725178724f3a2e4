//! The `abcis` command line: `run`, `summarize` and `pilot`.
//!
//! Exit codes: 0 on success, 1 on any error, 2 when a run finishes but
//! every importance weight is zero.

pub mod config;
pub mod output;
pub mod setup;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{AbcError, Result};
use crate::params::ParamVector;
use crate::samplers::{run_abc_is, run_abc_mh, run_pilot, WeightedSample, DEFAULT_PILOT, DIAGNOSTIC_QUANTILES};
use crate::samplers::ToleranceRule;

use config::{emit_config, load_config, Algorithm, RunFile};
use output::{RunInfo, SUMMARY_PROBS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;

/// Tolerance below which posterior weights are taken to sum to one.
const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "abcis", version, about = "Likelihood-free inference with surrogate likelihoods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a sampler and write posterior.csv, diagnostics.csv, summary.csv
    /// and manifest.json to the output directory.
    Run(RunArgs),
    /// Summarise a posterior.csv file.
    Summarize(SummarizeArgs),
    /// Prior-predictive pilot distances for a distance-based method.
    Pilot(PilotArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the sampler seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Overrides the number of worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    /// posterior.csv written by `run`.
    #[arg(long)]
    posterior: PathBuf,
    /// Quantile levels, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = SUMMARY_PROBS.to_vec())]
    probs: Vec<f64>,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PilotArgs {
    #[command(flatten)]
    common: Common,
    /// Number of pilot simulations; defaults to the configured pilot size.
    #[arg(long)]
    size: Option<usize>,
}

pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Summarize(a) => cmd_summarize(&a),
        Command::Pilot(a) => cmd_pilot(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Errors surfaced by the command layer.
#[derive(Debug)]
enum CliError {
    Config(config::ConfigErrors),
    Abc(AbcError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "invalid configuration\n{e}"),
            CliError::Abc(e) => write!(f, "{e}"),
        }
    }
}

impl From<AbcError> for CliError {
    fn from(e: AbcError) -> Self {
        CliError::Abc(e)
    }
}

fn load(common: &Common) -> std::result::Result<(RunFile, PathBuf), CliError> {
    let mut file = load_config(&common.config).map_err(CliError::Config)?;
    if let Some(seed) = common.seed {
        file.sampler.seed = seed;
    }
    let dir = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    std::fs::create_dir_all(&common.out)
        .map_err(|e| AbcError::InvalidData(format!("{}: {e}", common.out.display())))?;
    Ok((file, dir))
}

fn cmd_run(args: &RunArgs) -> std::result::Result<i32, CliError> {
    let (mut file, dir) = load(&args.common)?;
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(AbcError::InvalidParameter("--workers must be >= 1".into()).into());
        }
        file.sampler.workers = w;
    }
    let started = Instant::now();
    let sample = execute(&file, &dir)?;
    let elapsed = started.elapsed().as_secs_f64();
    let out = &args.common.out;

    output::write_text(&out.join("posterior.csv"), &output::posterior_csv(&sample))?;
    output::write_text(&out.join("diagnostics.csv"), &output::diagnostics_csv(&sample))?;
    let config_text = emit_config(&file);
    let info = RunInfo {
        config_text: &config_text,
        seed: file.sampler.seed,
        algorithm: match file.sampler.algorithm {
            Algorithm::Is => "is",
            Algorithm::Mh { .. } => "mh",
        },
        method: file.sampler.method.name(),
        iterations: file.sampler.iterations,
        n: file.sampler.n,
        workers: file.sampler.workers,
        wall_clock_seconds: elapsed,
    };
    output::write_text(&out.join("manifest.json"), &output::manifest_json(&sample, &info))?;
    if sample.is_degenerate() {
        eprintln!("warning: every importance weight is zero; the posterior is degenerate");
        return Ok(EXIT_DEGENERATE);
    }
    output::write_text(&out.join("summary.csv"), &output::summary_csv(&sample, &SUMMARY_PROBS)?)?;
    Ok(EXIT_OK)
}

/// Builds everything a configuration describes and runs its sampler.
pub fn execute(file: &RunFile, config_dir: &Path) -> Result<WeightedSample> {
    let model = setup::build_model(&file.model)?;
    let prior = setup::build_prior(file)?;
    let observed = setup::load_data(file, model.as_ref(), config_dir)?;
    match &file.sampler.algorithm {
        Algorithm::Is => run_abc_is(model.as_ref(), &prior, &observed, &setup::is_config(file)?),
        Algorithm::Mh {
            proposal_scale,
            burn_in,
            init,
        } => {
            let config = setup::mh_config(file, proposal_scale, *burn_in)?;
            let start = match init {
                Some(v) => v.clone(),
                None => prior.marginals().iter().map(|m| m.mean()).collect(),
            };
            let init = ParamVector::new(start, prior.names().clone())?;
            run_abc_mh(model.as_ref(), &prior, &observed, &config, &init)
        }
    }
}

fn cmd_summarize(args: &SummarizeArgs) -> std::result::Result<i32, CliError> {
    if let Some(p) = args.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(AbcError::InvalidParameter(format!("quantile level {p} outside [0, 1]")).into());
    }
    let text = std::fs::read_to_string(&args.posterior)
        .map_err(|e| AbcError::InvalidData(format!("{}: {e}", args.posterior.display())))?;
    let table = output::read_posterior(&text)?;
    let total: f64 = table.weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        eprintln!("warning: weights sum to {total}, renormalising");
    }
    let names: Arc<[String]> = table.names.into();
    let sample = WeightedSample::from_weights(names, table.values, &table.weights)?;
    if sample.is_degenerate() {
        return Err(AbcError::Degenerate.into());
    }
    let summary = output::summary_csv(&sample, &args.probs)?;
    match &args.out {
        Some(path) => output::write_text(path, &summary)?,
        None => print!("{summary}"),
    }
    Ok(EXIT_OK)
}

fn cmd_pilot(args: &PilotArgs) -> std::result::Result<i32, CliError> {
    let (file, dir) = load(&args.common)?;
    if !file.sampler.method.uses_distance() {
        return Err(AbcError::InvalidParameter(format!(
            "pilot runs apply to distance-based methods, not {}",
            file.sampler.method.name()
        ))
        .into());
    }
    let size = args.size.unwrap_or(match file.sampler.tolerance {
        Some(ToleranceRule::Quantile { pilot, .. }) => pilot,
        _ => DEFAULT_PILOT,
    });
    if size == 0 {
        return Err(AbcError::InvalidParameter("--size must be >= 1".into()).into());
    }
    let model = setup::build_model(&file.model)?;
    let prior = setup::build_prior(&file)?;
    let observed = setup::load_data(&file, model.as_ref(), &dir)?;
    let setup = setup::surrogate_setup(&file.sampler, &file.model)?;
    let pilot = run_pilot(model.as_ref(), &prior, &observed, &setup, size, file.sampler.seed)?;

    let d = prior.dim();
    let mut csv = String::new();
    for name in prior.names().iter() {
        let _ = write!(csv, "{name},");
    }
    csv.push_str("distance\n");
    for (i, rho) in pilot.distances.iter().enumerate() {
        for x in &pilot.thetas[i * d..(i + 1) * d] {
            let _ = write!(csv, "{x:.16e},");
        }
        let _ = writeln!(csv, "{rho:.16e}");
    }
    output::write_text(&args.common.out.join("pilot.csv"), &csv)?;

    println!("quantile,epsilon");
    for q in DIAGNOSTIC_QUANTILES {
        let eps = crate::samplers::select_tolerance(q, &pilot.distances)?;
        println!("{q},{eps:.16e}");
    }
    Ok(EXIT_OK)
}
