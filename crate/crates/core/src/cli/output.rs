//! Run artefacts: posterior draws, tolerance diagnostics, the manifest and
//! posterior summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{AbcError, Result};
use crate::samplers::{posterior_mean, posterior_quantiles, posterior_sd, WeightedSample};

/// Summary quantiles written by default.
pub const SUMMARY_PROBS: [f64; 3] = [0.025, 0.5, 0.975];

fn io(path: &Path, e: std::io::Error) -> AbcError {
    AbcError::InvalidData(format!("{}: {e}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io(path, e))
}

/// One row per draw: parameters, `raw_weight`, `norm_weight`.
pub fn posterior_csv(sample: &WeightedSample) -> String {
    let mut out = String::new();
    for name in sample.names().iter() {
        let _ = write!(out, "{name},");
    }
    out.push_str("raw_weight,norm_weight\n");
    let raw = sample.raw_weights();
    let norm = sample.normalized_weights();
    for s in 0..sample.len() {
        for x in sample.theta(s) {
            let _ = write!(out, "{x:.16e},");
        }
        let _ = writeln!(out, "{:.16e},{:.16e}", raw[s], norm[s]);
    }
    out
}

pub fn diagnostics_csv(sample: &WeightedSample) -> String {
    let mut out = String::from("quantile,epsilon,accepted,ess\n");
    for d in sample.diagnostics() {
        let _ = writeln!(out, "{},{:.16e},{},{:.16e}", d.quantile, d.epsilon, d.accepted, d.ess);
    }
    out
}

fn probability_label(p: f64) -> String {
    format!("q{p}")
}

/// Posterior mean, sd and quantiles per parameter.
pub fn summary_csv(sample: &WeightedSample, probs: &[f64]) -> Result<String> {
    let mean = posterior_mean(sample)?;
    let sd = posterior_sd(sample)?;
    let q = posterior_quantiles(sample, probs)?;
    let mut out = String::from("parameter,mean,sd");
    for &p in probs {
        let _ = write!(out, ",{}", probability_label(p));
    }
    out.push('\n');
    for (j, name) in sample.names().iter().enumerate() {
        let _ = write!(out, "{name},{:.16e},{:.16e}", mean[j], sd[j]);
        for x in &q[j] {
            let _ = write!(out, ",{x:.16e}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// A JSON number, or a string for values JSON cannot hold.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("NaN")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Manifest fields that do not come from the sample itself.
pub struct RunInfo<'a> {
    pub config_text: &'a str,
    pub seed: u64,
    pub algorithm: &'a str,
    pub method: &'a str,
    pub iterations: usize,
    pub n: usize,
    pub workers: usize,
    pub wall_clock_seconds: f64,
}

/// `serde_json` keeps object keys sorted, so the output is canonical.
pub fn manifest_json(sample: &WeightedSample, info: &RunInfo<'_>) -> String {
    let mut m = Map::new();
    m.insert("config".into(), json!(info.config_text));
    m.insert("seed".into(), json!(info.seed));
    m.insert("algorithm".into(), json!(info.algorithm));
    m.insert("method".into(), json!(info.method));
    m.insert("S".into(), json!(info.iterations));
    m.insert("N".into(), json!(info.n));
    m.insert("workers".into(), json!(info.workers));
    m.insert("epsilon".into(), sample.epsilon().map_or(Value::Null, number));
    m.insert("ess".into(), number(sample.ess()));
    m.insert("accepted_count".into(), json!(sample.accepted_count()));
    m.insert("degenerate".into(), json!(sample.is_degenerate()));
    m.insert("log_weight_shift".into(), number(sample.log_shift()));
    m.insert("acceptance_rate".into(), sample.acceptance_rate().map_or(Value::Null, number));
    m.insert("bootstrap_extrapolated".into(), json!(sample.extrapolated_count()));
    m.insert("parameters".into(), json!(sample.names().to_vec()));
    m.insert("wall_clock_seconds".into(), number(info.wall_clock_seconds));
    m.insert(
        "versions".into(),
        json!({ env!("CARGO_PKG_NAME"): env!("CARGO_PKG_VERSION") }),
    );
    let mut text = serde_json::to_string_pretty(&Value::Object(m)).expect("manifest serialises");
    text.push('\n');
    text
}

/// A posterior file read back: names, flat draws and the weight column.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Reads `posterior.csv`; weights are taken from `norm_weight` (or
/// `raw_weight` when it is absent). Errors name the offending row.
pub fn read_posterior(text: &str) -> Result<PosteriorTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(AbcError::InvalidData("posterior file is empty".into()));
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let weight_col = columns
        .iter()
        .position(|c| *c == "norm_weight")
        .or_else(|| columns.iter().position(|c| *c == "raw_weight"))
        .ok_or_else(|| AbcError::InvalidData("posterior header has no weight column".into()))?;
    let param_cols: Vec<usize> = (0..columns.len())
        .filter(|&i| columns[i] != "norm_weight" && columns[i] != "raw_weight")
        .collect();
    if param_cols.is_empty() {
        return Err(AbcError::InvalidData("posterior header has no parameter columns".into()));
    }
    let names = param_cols.iter().map(|&i| columns[i].to_string()).collect();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for (i, line) in lines {
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(AbcError::InvalidData(format!(
                "row {row}: expected {} fields, got {}",
                columns.len(),
                fields.len()
            )));
        }
        let parse = |j: usize| -> Result<f64> {
            fields[j]
                .parse::<f64>()
                .map_err(|_| AbcError::InvalidData(format!("row {row}: cannot parse `{}`", fields[j])))
        };
        for &j in &param_cols {
            let v = parse(j)?;
            if !v.is_finite() {
                return Err(AbcError::InvalidData(format!("row {row}: non-finite parameter value")));
            }
            values.push(v);
        }
        let w = parse(weight_col)?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(AbcError::InvalidData(format!("row {row}: weight {w} is not a finite non-negative number")));
        }
        weights.push(w);
    }
    if weights.is_empty() {
        return Err(AbcError::InvalidData("posterior file has no draws".into()));
    }
    Ok(PosteriorTable { names, values, weights })
}
