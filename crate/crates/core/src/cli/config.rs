//! Run configuration files.
//!
//! Files are TOML with four tables. Names and expressions such as
//! `normal(0, 2)` are strings; counts, reals and lists are TOML numbers
//! and arrays:
//!
//! ```text
//! # comments run to the end of the line
//! [model]
//! kind = "conjugate_normal"
//! n = 50
//! sd = 1
//!
//! [data]
//! truth = 0.7
//! seed = 42
//!
//! [prior]
//! mu = "normal(0, 2)"
//!
//! [sampler]
//! method = "rejection"
//! S = 100000
//! tolerance = "quantile(0.01)"
//! ```
//!
//! Every problem in a file is reported at once, each with its line.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use toml::Spanned;

use crate::approx::{BandwidthRule, BootstrapSettings, ConstraintSet, DEFAULT_RIDGE, DEFAULT_SYNTHETIC_N};
use crate::models::{NoiseFamily, DEFAULT_SWEEPS, STANDARD_C};
use crate::prior::Marginal;
use crate::samplers::ToleranceRule;
use crate::summaries::{octile_probs, KernelKind};

/// Default coupling draws `M` for the coupled kernel.
pub const DEFAULT_COUPLING_DRAWS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Gk { n: usize, c: f64 },
    Potts { rows: usize, cols: usize, k: u32, sweeps: usize },
    MixedEffects { blocks: Vec<usize>, trend: bool, noise: NoiseFamily },
    ConjugateNormal { n: usize, sd: f64 },
    Bernoulli { n: usize },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Gk { .. } => "gk",
            ModelSpec::Potts { .. } => "potts",
            ModelSpec::MixedEffects { .. } => "mixed_effects",
            ModelSpec::ConjugateNormal { .. } => "conjugate_normal",
            ModelSpec::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            ModelSpec::Gk { .. } => ["A", "B", "g", "k"].map(String::from).to_vec(),
            ModelSpec::Potts { .. } => vec!["theta".into()],
            ModelSpec::MixedEffects { trend, .. } => {
                let p = if *trend { 2 } else { 1 };
                let mut names: Vec<String> = (1..=p).map(|i| format!("beta_{i}")).collect();
                names.push("zeta".into());
                names.push("sigma".into());
                names
            }
            ModelSpec::ConjugateNormal { .. } => vec!["mu".into()],
            ModelSpec::Bernoulli { .. } => vec!["p".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    /// Whitespace-separated observations; relative paths are taken from
    /// the directory of the configuration file.
    File(PathBuf),
    /// Simulated from the model at `truth`.
    Simulated { truth: Vec<f64>, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rejection,
    Kernel,
    Coupled,
    Synthetic,
    Empirical,
    Bootstrap,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Rejection,
        Method::Kernel,
        Method::Coupled,
        Method::Synthetic,
        Method::Empirical,
        Method::Bootstrap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rejection => "rejection",
            Method::Kernel => "kernel",
            Method::Coupled => "coupled",
            Method::Synthetic => "synthetic",
            Method::Empirical => "empirical",
            Method::Bootstrap => "bootstrap",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn uses_distance(self) -> bool {
        matches!(self, Method::Rejection | Method::Kernel | Method::Coupled)
    }

    /// Default synthetic data sets per iteration.
    fn default_n(self) -> usize {
        match self {
            Method::Rejection | Method::Kernel => 1,
            Method::Synthetic => DEFAULT_SYNTHETIC_N,
            Method::Coupled | Method::Empirical | Method::Bootstrap => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Is,
    Mh {
        proposal_scale: Vec<f64>,
        burn_in: usize,
        /// `None` starts at the prior mean.
        init: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatisticChoice {
    /// The model's default statistic.
    Default,
    Identity,
    Moments(Vec<u32>),
    Quantiles(Vec<f64>),
    Potts,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceChoice {
    Euclidean,
    Mad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    pub algorithm: Algorithm,
    pub method: Method,
    /// `S`.
    pub iterations: usize,
    /// `N`, synthetic data sets per iteration.
    pub n: usize,
    pub seed: u64,
    pub workers: usize,
    pub statistic: StatisticChoice,
    pub distance: DistanceChoice,
    /// Set for distance-based methods only.
    pub tolerance: Option<ToleranceRule>,
    pub kernel: KernelKind,
    pub coupling_draws: usize,
    pub ridge: f64,
    pub constraints: ConstraintSet,
    pub bootstrap: BootstrapSettings,
}

impl SamplerSpec {
    /// Defaults for `method` under importance sampling.
    pub fn new(method: Method, iterations: usize, seed: u64) -> Self {
        Self {
            algorithm: Algorithm::Is,
            method,
            iterations,
            n: method.default_n(),
            seed,
            workers: 1,
            statistic: StatisticChoice::Default,
            distance: DistanceChoice::Mad,
            tolerance: method.uses_distance().then(|| ToleranceRule::quantile(0.01)),
            kernel: KernelKind::Epanechnikov,
            coupling_draws: DEFAULT_COUPLING_DRAWS,
            ridge: DEFAULT_RIDGE,
            constraints: ConstraintSet::Mean,
            bootstrap: BootstrapSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFile {
    pub model: ModelSpec,
    pub data: DataSpec,
    /// In the model's parameter order.
    pub prior: Vec<(String, Marginal)>,
    pub sampler: SamplerSpec,
}

/// One problem in a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

struct Entry {
    key: String,
    /// Scalars as text, arrays as comma-separated text.
    value: String,
    line: usize,
}

struct Section {
    line: usize,
    entries: Vec<Entry>,
    used: Vec<bool>,
}

impl Section {
    fn get(&mut self, key: &str) -> Option<(&str, usize)> {
        let i = self.entries.iter().position(|e| e.key == key)?;
        self.used[i] = true;
        Some((&self.entries[i].value, self.entries[i].line))
    }
}

const SECTIONS: [&str; 4] = ["model", "data", "prior", "sampler"];

type RawTable = BTreeMap<String, Spanned<toml::Value>>;

struct Parser {
    errors: Vec<ConfigError>,
    /// Lines holding string values, which numeric keys reject.
    string_lines: HashSet<usize>,
}

fn flatten(v: &toml::Value) -> Option<(String, bool)> {
    Some(match v {
        toml::Value::String(s) => (s.clone(), true),
        toml::Value::Integer(i) => (i.to_string(), false),
        toml::Value::Float(f) => (f.to_string(), false),
        toml::Value::Boolean(b) => (b.to_string(), false),
        toml::Value::Array(items) => {
            let mut parts = Vec::with_capacity(items.len());
            let mut any_string = false;
            for item in items {
                if matches!(item, toml::Value::Array(_)) {
                    return None;
                }
                let (text, is_string) = flatten(item)?;
                any_string |= is_string;
                parts.push(text);
            }
            (parts.join(", "), any_string)
        }
        toml::Value::Datetime(_) | toml::Value::Table(_) => return None,
    })
}

impl Parser {
    fn error(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    /// Reads the TOML document; `None` after a syntax error.
    fn sections(&mut self, text: &str) -> Option<HashMap<String, Section>> {
        let line_of = |offset: usize| text[..offset.min(text.len())].matches('\n').count() + 1;
        let raw: BTreeMap<String, Spanned<RawTable>> = match toml::from_str(text) {
            Ok(raw) => raw,
            Err(e) => {
                let line = e.span().map(|s| line_of(s.start));
                self.error(line, e.message().trim().to_string());
                return None;
            }
        };
        let mut sections = HashMap::new();
        for (name, table) in raw {
            let line = line_of(table.span().start);
            if !SECTIONS.contains(&name.as_str()) {
                self.error(Some(line), format!("unknown section [{name}]"));
                continue;
            }
            let mut entries = Vec::new();
            for (key, value) in table.into_inner() {
                let line = line_of(value.span().start);
                match flatten(value.get_ref()) {
                    Some((text, is_string)) => {
                        if is_string {
                            self.string_lines.insert(line);
                        }
                        entries.push(Entry { key, value: text, line });
                    }
                    None => self.error(Some(line), format!("`{key}`: unsupported value")),
                }
            }
            entries.sort_by_key(|e| e.line);
            let used = vec![false; entries.len()];
            sections.insert(name, Section { line, entries, used });
        }
        Some(sections)
    }

    /// Parses text without checking how the value was written.
    fn parse_text<T: std::str::FromStr>(&mut self, value: &str, line: usize, key: &str) -> Option<T> {
        match value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(Some(line), format!("`{key}`: cannot parse `{value}`"));
                None
            }
        }
    }

    /// A value written as a TOML number.
    fn number<T: std::str::FromStr>(&mut self, value: &str, line: usize, key: &str) -> Option<T> {
        if self.string_lines.contains(&line) {
            self.error(Some(line), format!("`{key}` must be a number, not a string"));
            return None;
        }
        self.parse_text(value, line, key)
    }

    /// Seeds may also be quoted: TOML integers stop at `2^63 - 1`.
    fn seed(&mut self, value: &str, line: usize) -> Option<u64> {
        self.parse_text(value, line, "seed")
    }

    fn real_text(&mut self, value: &str, line: usize, key: &str) -> Option<f64> {
        let v: f64 = self.parse_text(value, line, key)?;
        if v.is_nan() {
            self.error(Some(line), format!("`{key}` must not be NaN"));
            return None;
        }
        Some(v)
    }

    fn real(&mut self, value: &str, line: usize, key: &str) -> Option<f64> {
        if self.string_lines.contains(&line) {
            self.error(Some(line), format!("`{key}` must be a number, not a string"));
            return None;
        }
        self.real_text(value, line, key)
    }

    /// A TOML array of numbers; a single number is a one-element list.
    fn list<T: std::str::FromStr>(&mut self, value: &str, line: usize, key: &str) -> Option<Vec<T>> {
        if value.trim().is_empty() {
            self.error(Some(line), format!("`{key}` is empty"));
            return None;
        }
        let mut out = Vec::new();
        for part in value.split(',') {
            out.push(self.number(part.trim(), line, key)?);
        }
        Some(out)
    }

    fn reals(&mut self, value: &str, line: usize, key: &str) -> Option<Vec<f64>> {
        let v: Vec<f64> = self.list(value, line, key)?;
        if v.iter().any(|x| x.is_nan()) {
            self.error(Some(line), format!("`{key}` must not contain NaN"));
            return None;
        }
        Some(v)
    }

    /// `name` or `name(arg, ...)` inside a string value.
    fn call<'v>(&mut self, value: &'v str, line: usize, key: &str) -> Option<(&'v str, Vec<&'v str>)> {
        if !self.string_lines.contains(&line) {
            self.error(Some(line), format!("`{key}` must be a quoted string"));
            return None;
        }
        match value.split_once('(') {
            None => Some((value.trim(), Vec::new())),
            Some((name, rest)) => match rest.trim_end().strip_suffix(')') {
                Some(args) => {
                    let args = if args.trim().is_empty() {
                        Vec::new()
                    } else {
                        args.split(',').map(str::trim).collect()
                    };
                    Some((name.trim(), args))
                }
                None => {
                    self.error(Some(line), format!("`{key}`: missing `)` in `{value}`"));
                    None
                }
            },
        }
    }

    /// `name(a, b, ...)` with exactly `arity` real arguments.
    fn real_call(&mut self, args: &[&str], arity: usize, line: usize, key: &str) -> Option<Vec<f64>> {
        if args.len() != arity {
            self.error(
                Some(line),
                format!("`{key}`: expected {arity} argument(s), got {}", args.len()),
            );
            return None;
        }
        let mut out = Vec::with_capacity(arity);
        for a in args {
            out.push(self.real_text(a, line, key)?);
        }
        Some(out)
    }

    fn finish(&mut self, name: &str, section: &Section) {
        for (e, used) in section.entries.iter().zip(&section.used) {
            if !used {
                self.error(Some(e.line), format!("unknown key `{}` in [{name}]", e.key));
            }
        }
    }

    fn required<'s>(&mut self, section: &'s mut Section, name: &str, key: &str) -> Option<(&'s str, usize)> {
        let line = section.line;
        let found = section.get(key);
        if found.is_none() {
            self.error(Some(line), format!("[{name}] is missing `{key}`"));
        }
        found
    }
}

/// Parses and validates a configuration; all problems are reported together.
pub fn parse_config(text: &str) -> Result<RunFile, ConfigErrors> {
    let mut p = Parser {
        errors: Vec::new(),
        string_lines: HashSet::new(),
    };
    let Some(mut sections) = p.sections(text) else {
        return Err(ConfigErrors(p.errors));
    };
    let missing = |p: &mut Parser, name: &str| {
        p.error(None, format!("missing section [{name}]"));
    };

    let model = match sections.get_mut("model") {
        Some(s) => parse_model(&mut p, s),
        None => {
            missing(&mut p, "model");
            None
        }
    };
    let names = model.as_ref().map(ModelSpec::param_names);
    let dim = names.as_ref().map(Vec::len);

    let data = match sections.get_mut("data") {
        Some(s) => parse_data(&mut p, s, dim),
        None => {
            missing(&mut p, "data");
            None
        }
    };
    let prior = match sections.get_mut("prior") {
        Some(s) => parse_prior(&mut p, s, names.as_deref()),
        None => {
            missing(&mut p, "prior");
            None
        }
    };
    let sampler = match sections.get_mut("sampler") {
        Some(s) => parse_sampler(&mut p, s, model.as_ref()),
        None => {
            missing(&mut p, "sampler");
            None
        }
    };
    for name in SECTIONS {
        if let Some(s) = sections.get(name) {
            p.finish(name, s);
        }
    }
    p.errors.sort_by_key(|e| e.line.unwrap_or(0));
    match (model, data, prior, sampler) {
        (Some(model), Some(data), Some(prior), Some(sampler)) if p.errors.is_empty() => Ok(RunFile {
            model,
            data,
            prior,
            sampler,
        }),
        _ => Err(ConfigErrors(p.errors)),
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunFile, ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    parse_config(&text)
}

fn parse_model(p: &mut Parser, s: &mut Section) -> Option<ModelSpec> {
    let (kind, line) = p.required(s, "model", "kind")?;
    let kind = kind.to_string();
    let count = |p: &mut Parser, s: &mut Section, key: &str, default: Option<usize>| -> Option<usize> {
        match s.get(key) {
            Some((v, l)) => {
                let n: usize = p.number(v, l, key)?;
                if n == 0 {
                    p.error(Some(l), format!("`{key}` must be >= 1"));
                    return None;
                }
                Some(n)
            }
            None => default.or_else(|| {
                p.error(Some(s.line), format!("[model] is missing `{key}`"));
                None
            }),
        }
    };
    let positive = |p: &mut Parser, s: &mut Section, key: &str, default: f64| -> Option<f64> {
        match s.get(key) {
            Some((v, l)) => {
                let x = p.real(v, l, key)?;
                if !(x > 0.0 && x.is_finite()) {
                    p.error(Some(l), format!("`{key}` must be finite and > 0"));
                    return None;
                }
                Some(x)
            }
            None => Some(default),
        }
    };
    match kind.as_str() {
        "gk" => {
            let n = count(p, s, "n", None);
            let c = match s.get("c") {
                Some((v, l)) => p.real(v, l, "c"),
                None => Some(STANDARD_C),
            };
            Some(ModelSpec::Gk { n: n?, c: c? })
        }
        "potts" => {
            let rows = count(p, s, "rows", None);
            let cols = count(p, s, "cols", None);
            let k = count(p, s, "k", None).and_then(|k| {
                if k < 2 || k > u32::MAX as usize {
                    p.error(Some(s.line), "`k` must be >= 2");
                    None
                } else {
                    Some(k as u32)
                }
            });
            let sweeps = count(p, s, "sweeps", Some(DEFAULT_SWEEPS));
            Some(ModelSpec::Potts {
                rows: rows?,
                cols: cols?,
                k: k?,
                sweeps: sweeps?,
            })
        }
        "mixed_effects" => {
            let blocks = match p.required(s, "model", "blocks") {
                Some((v, l)) => {
                    let v = v.to_string();
                    p.list::<usize>(&v, l, "blocks").and_then(|b| {
                        if b.is_empty() || b.contains(&0) {
                            p.error(Some(l), "`blocks` must be positive block sizes");
                            None
                        } else {
                            Some(b)
                        }
                    })
                }
                None => None,
            };
            let trend = match s.get("design") {
                None | Some(("intercept", _)) => Some(false),
                Some(("intercept_trend", _)) => Some(true),
                Some((v, l)) => {
                    p.error(Some(l), format!("unknown design `{v}` (intercept, intercept_trend)"));
                    None
                }
            };
            let noise = match s.get("noise") {
                None => Some(NoiseFamily::Normal),
                Some((v, l)) => {
                    let v = v.to_string();
                    match p.call(&v, l, "noise") {
                        Some(("normal", a)) if a.is_empty() => Some(NoiseFamily::Normal),
                        Some(("student_t", a)) => p.real_call(&a, 1, l, "noise").and_then(|nu| {
                            if nu[0] > 0.0 && nu[0].is_finite() {
                                Some(NoiseFamily::StudentT { nu: nu[0] })
                            } else {
                                p.error(Some(l), "student_t degrees of freedom must be > 0");
                                None
                            }
                        }),
                        Some(_) => {
                            p.error(Some(l), format!("unknown noise `{v}` (normal, student_t(nu))"));
                            None
                        }
                        None => None,
                    }
                }
            };
            Some(ModelSpec::MixedEffects {
                blocks: blocks?,
                trend: trend?,
                noise: noise?,
            })
        }
        "conjugate_normal" => {
            let n = count(p, s, "n", None);
            let sd = positive(p, s, "sd", 1.0);
            Some(ModelSpec::ConjugateNormal { n: n?, sd: sd? })
        }
        "bernoulli" => {
            let n = count(p, s, "n", None);
            Some(ModelSpec::Bernoulli { n: n? })
        }
        other => {
            p.error(
                Some(line),
                format!("unknown model `{other}` (gk, potts, mixed_effects, conjugate_normal, bernoulli)"),
            );
            None
        }
    }
}

fn parse_data(p: &mut Parser, s: &mut Section, dim: Option<usize>) -> Option<DataSpec> {
    let file = s.get("file").map(|(v, l)| (v.to_string(), l));
    let truth = s.get("truth").map(|(v, l)| (v.to_string(), l));
    let seed = s.get("seed").map(|(v, l)| (v.to_string(), l));
    match (file, truth) {
        (Some((f, l)), None) => {
            if let Some((_, sl)) = seed {
                p.error(Some(sl), "`seed` applies only to simulated data (`truth`)");
                return None;
            }
            if f.is_empty() {
                p.error(Some(l), "`file` is empty");
                return None;
            }
            Some(DataSpec::File(PathBuf::from(f)))
        }
        (None, Some((t, l))) => {
            let truth = p.reals(&t, l, "truth")?;
            if let Some(d) = dim {
                if truth.len() != d {
                    p.error(Some(l), format!("`truth` has {} values, the model has {d} parameters", truth.len()));
                    return None;
                }
            }
            let seed = match seed {
                Some((v, sl)) => p.seed(&v, sl)?,
                None => 0,
            };
            Some(DataSpec::Simulated { truth, seed })
        }
        (Some(_), Some((_, l))) => {
            p.error(Some(l), "give either `file` or `truth`, not both");
            None
        }
        (None, None) => {
            p.error(Some(s.line), "[data] needs `file` or `truth`");
            None
        }
    }
}

fn parse_marginal(p: &mut Parser, value: &str, line: usize, key: &str) -> Option<Marginal> {
    let (name, args) = p.call(value, line, key)?;
    let m = match name {
        "uniform" => {
            let a = p.real_call(&args, 2, line, key)?;
            Marginal::Uniform { lo: a[0], hi: a[1] }
        }
        "normal" => {
            let a = p.real_call(&args, 2, line, key)?;
            Marginal::Normal { mean: a[0], sd: a[1] }
        }
        "lognormal" => {
            let a = p.real_call(&args, 2, line, key)?;
            Marginal::LogNormal { mu: a[0], sigma: a[1] }
        }
        other => {
            p.error(Some(line), format!("`{key}`: unknown distribution `{other}` (uniform, normal, lognormal)"));
            return None;
        }
    };
    if let Err(e) = m.validate() {
        p.error(Some(line), format!("`{key}`: {e}"));
        return None;
    }
    Some(m)
}

fn parse_prior(p: &mut Parser, s: &mut Section, names: Option<&[String]>) -> Option<Vec<(String, Marginal)>> {
    let entries: Vec<(String, String, usize)> =
        s.entries.iter().map(|e| (e.key.clone(), e.value.clone(), e.line)).collect();
    s.used.iter_mut().for_each(|u| *u = true);
    let mut parsed = Vec::new();
    let mut ok = true;
    for (key, value, line) in &entries {
        match parse_marginal(p, value, *line, key) {
            Some(m) => parsed.push((key.clone(), m, *line)),
            None => ok = false,
        }
    }
    let names = names?;
    for (key, _, line) in &parsed {
        if !names.contains(key) {
            p.error(Some(*line), format!("unknown parameter `{key}` (model parameters: {})", names.join(", ")));
            ok = false;
        }
    }
    let mut ordered = Vec::with_capacity(names.len());
    for name in names {
        match parsed.iter().find(|(k, _, _)| k == name) {
            Some((k, m, _)) => ordered.push((k.clone(), *m)),
            None => {
                if !entries.iter().any(|(k, _, _)| k == name) {
                    p.error(Some(s.line), format!("[prior] is missing parameter `{name}`"));
                }
                ok = false;
            }
        }
    }
    ok.then_some(ordered)
}

fn parse_tolerance(p: &mut Parser, value: &str, line: usize) -> Option<ToleranceRule> {
    let (name, args) = p.call(value, line, "tolerance")?;
    match name {
        "quantile" => {
            let q = p.real_call(&args, 1, line, "tolerance")?[0];
            if !(q > 0.0 && q <= 1.0) {
                p.error(Some(line), format!("tolerance quantile must lie in (0, 1], got {q}"));
                return None;
            }
            Some(ToleranceRule::quantile(q))
        }
        "fixed" => {
            let e = p.real_call(&args, 1, line, "tolerance")?[0];
            if e < 0.0 {
                p.error(Some(line), format!("tolerance must be >= 0, got {e}"));
                return None;
            }
            Some(ToleranceRule::Fixed(e))
        }
        other => {
            p.error(Some(line), format!("unknown tolerance rule `{other}` (quantile(q), fixed(e))"));
            None
        }
    }
}

fn parse_statistic(p: &mut Parser, value: &str, line: usize) -> Option<StatisticChoice> {
    let (name, args) = p.call(value, line, "statistic")?;
    let bad_args = |p: &mut Parser| {
        p.error(Some(line), format!("`statistic`: `{name}` takes no arguments"));
    };
    match name {
        "default" | "identity" | "octiles" | "potts" | "mixed" if !args.is_empty() => {
            bad_args(p);
            None
        }
        "default" => Some(StatisticChoice::Default),
        "identity" => Some(StatisticChoice::Identity),
        "octiles" => Some(StatisticChoice::Quantiles(octile_probs())),
        "potts" => Some(StatisticChoice::Potts),
        "mixed" => Some(StatisticChoice::Mixed),
        "moments" => {
            let mut orders = Vec::new();
            for a in &args {
                let o: u32 = p.parse_text(a, line, "statistic")?;
                if o == 0 {
                    p.error(Some(line), "moment orders must be >= 1");
                    return None;
                }
                orders.push(o);
            }
            if orders.is_empty() {
                p.error(Some(line), "`moments` needs at least one order");
                return None;
            }
            Some(StatisticChoice::Moments(orders))
        }
        "quantiles" => {
            let mut probs = Vec::new();
            for a in &args {
                let q = p.real_text(a, line, "statistic")?;
                if !(0.0..=1.0).contains(&q) {
                    p.error(Some(line), format!("quantile probability {q} outside [0, 1]"));
                    return None;
                }
                probs.push(q);
            }
            if probs.is_empty() {
                p.error(Some(line), "`quantiles` needs at least one probability");
                return None;
            }
            Some(StatisticChoice::Quantiles(probs))
        }
        other => {
            p.error(
                Some(line),
                format!("unknown statistic `{other}` (default, identity, moments(..), quantiles(..), octiles, potts, mixed)"),
            );
            None
        }
    }
}

fn parse_sampler(p: &mut Parser, s: &mut Section, model: Option<&ModelSpec>) -> Option<SamplerSpec> {
    let method = match p.required(s, "sampler", "method") {
        Some((v, l)) => match Method::parse(v) {
            Some(m) => Some(m),
            None => {
                let v = v.to_string();
                p.error(
                    Some(l),
                    format!("unknown method `{v}` (rejection, kernel, coupled, synthetic, empirical, bootstrap)"),
                );
                None
            }
        },
        None => None,
    };
    let iterations = match p.required(s, "sampler", "S") {
        Some((v, l)) => {
            let v = v.to_string();
            p.number::<usize>(&v, l, "S").and_then(|n| {
                if n == 0 {
                    p.error(Some(l), "`S` must be >= 1");
                    None
                } else {
                    Some(n)
                }
            })
        }
        None => None,
    };
    // keys whose meaning depends on the method are read after it is known
    let method = method?;
    let iterations = iterations?;
    let mut spec = SamplerSpec::new(method, iterations, 0);
    let mut ok = true;
    let fail = |p: &mut Parser, line: usize, msg: String| {
        p.error(Some(line), msg);
        false
    };

    macro_rules! read {
        ($key:expr, |$v:ident, $l:ident| $body:expr) => {
            if let Some((raw, $l)) = s.get($key) {
                let $v = raw.to_string();
                match $body {
                    Some(x) => Some(x),
                    None => {
                        ok = false;
                        None
                    }
                }
            } else {
                None
            }
        };
    }

    if let Some(seed) = read!("seed", |v, l| p.seed(&v, l)) {
        spec.seed = seed;
    }
    if let Some(w) = read!("workers", |v, l| p.number::<usize>(&v, l, "workers")) {
        if w == 0 {
            ok = fail(p, s.get("workers").unwrap().1, "`workers` must be >= 1".into());
        }
        spec.workers = w;
    }
    let n_line = s.get("N").map(|(_, l)| l);
    if let Some(n) = read!("N", |v, l| p.number::<usize>(&v, l, "N")) {
        spec.n = n;
    }
    if let Some(l) = n_line {
        let msg = match method {
            Method::Rejection | Method::Kernel if spec.n != 1 => {
                Some(format!("N = {} but the {} kernel uses N = 1", spec.n, method.name()))
            }
            Method::Synthetic if spec.n < 2 => Some("N >= 2 required".to_string()),
            Method::Coupled | Method::Empirical | Method::Bootstrap if spec.n != 0 => Some(format!(
                "N = {} but the {} kernel simulates no data sets (N = 0)",
                spec.n,
                method.name()
            )),
            _ => None,
        };
        if let Some(msg) = msg {
            ok = fail(p, l, msg);
        }
    }
    if let Some(stat) = read!("statistic", |v, l| parse_statistic(p, &v, l)) {
        let line = s.get("statistic").unwrap().1;
        let compatible = match (&stat, model) {
            (StatisticChoice::Potts, Some(m)) => matches!(m, ModelSpec::Potts { .. }),
            (StatisticChoice::Mixed, Some(m)) => matches!(m, ModelSpec::MixedEffects { .. }),
            (StatisticChoice::Moments(_) | StatisticChoice::Quantiles(_), Some(m)) => {
                !matches!(m, ModelSpec::Potts { .. })
            }
            _ => true,
        };
        if !compatible {
            ok = fail(p, line, format!("statistic is not defined for the {} model", model.unwrap().kind()));
        }
        spec.statistic = stat;
    }

    let distance_keys = ["distance", "tolerance", "pilot"];
    if method.uses_distance() {
        if let Some(d) = read!("distance", |v, l| match v.as_str() {
            "euclidean" => Some(DistanceChoice::Euclidean),
            "mad" => Some(DistanceChoice::Mad),
            other => {
                p.error(Some(l), format!("unknown distance `{other}` (euclidean, mad)"));
                None
            }
        }) {
            spec.distance = d;
        }
        if let Some(t) = read!("tolerance", |v, l| parse_tolerance(p, &v, l)) {
            spec.tolerance = Some(t);
        }
        if let Some(size) = read!("pilot", |v, l| p.number::<usize>(&v, l, "pilot")) {
            let line = s.get("pilot").unwrap().1;
            match &mut spec.tolerance {
                Some(ToleranceRule::Quantile { pilot, .. }) if size > 0 => *pilot = size,
                Some(ToleranceRule::Quantile { .. }) => ok = fail(p, line, "`pilot` must be >= 1".into()),
                _ => ok = fail(p, line, "`pilot` applies only to tolerance = quantile(q)".into()),
            }
        }
        if method == Method::Kernel {
            if let Some(ToleranceRule::Fixed(e)) = spec.tolerance {
                if !(e > 0.0) {
                    let line = s.get("tolerance").unwrap().1;
                    ok = fail(p, line, "kernel bandwidth must be > 0".into());
                }
            }
        }
    } else {
        for key in distance_keys {
            if let Some((_, l)) = s.get(key) {
                ok = fail(p, l, format!("`{key}` does not apply to the {} kernel", method.name()));
            }
        }
        spec.tolerance = None;
    }

    let only = |p: &mut Parser, s: &mut Section, key: &str, applies: bool| -> bool {
        if applies {
            return true;
        }
        if let Some((_, l)) = s.get(key) {
            p.error(Some(l), format!("`{key}` does not apply to the {} kernel", method.name()));
            return false;
        }
        true
    };
    ok &= only(p, s, "kernel", method == Method::Kernel);
    ok &= only(p, s, "coupling_draws", method == Method::Coupled);
    ok &= only(p, s, "ridge", method == Method::Synthetic);
    ok &= only(p, s, "constraints", method == Method::Empirical);
    for key in ["J", "K", "span", "bandwidth"] {
        ok &= only(p, s, key, method == Method::Bootstrap);
    }

    if let Some(k) = read!("kernel", |v, l| match v.as_str() {
        "epanechnikov" => Some(KernelKind::Epanechnikov),
        "gaussian" => Some(KernelKind::Gaussian),
        other => {
            p.error(Some(l), format!("unknown kernel `{other}` (epanechnikov, gaussian)"));
            None
        }
    }) {
        spec.kernel = k;
    }
    if let Some(m) = read!("coupling_draws", |v, l| p.number::<usize>(&v, l, "coupling_draws")) {
        if m == 0 {
            ok = fail(p, s.get("coupling_draws").unwrap().1, "coupling draws M must be >= 1".into());
        }
        spec.coupling_draws = m;
    }
    if let Some(r) = read!("ridge", |v, l| p.real(&v, l, "ridge")) {
        if !(r >= 0.0 && r.is_finite()) {
            ok = fail(p, s.get("ridge").unwrap().1, "ridge must be finite and >= 0".into());
        }
        spec.ridge = r;
    }
    if let Some(c) = read!("constraints", |v, l| match v.as_str() {
        "mean" => Some(ConstraintSet::Mean),
        "mean_var" => Some(ConstraintSet::MeanVariance),
        other => {
            p.error(Some(l), format!("unknown constraints `{other}` (mean, mean_var)"));
            None
        }
    }) {
        spec.constraints = c;
    }
    if method == Method::Empirical {
        if let Some(m) = model {
            let d = m.param_names().len();
            if spec.constraints.len() != d {
                let section_line = s.line;
                let line = s.get("constraints").map_or(section_line, |(_, l)| l);
                ok = fail(
                    p,
                    line,
                    format!(
                        "{} constraints fit a {}-parameter model, the {} model has {d}",
                        spec.constraints.name(),
                        spec.constraints.len(),
                        m.kind()
                    ),
                );
            }
        }
    }
    if let Some(j) = read!("J", |v, l| p.number::<usize>(&v, l, "J")) {
        spec.bootstrap.j = j;
    }
    if let Some(k) = read!("K", |v, l| p.number::<usize>(&v, l, "K")) {
        spec.bootstrap.k = k;
    }
    if let Some(span) = read!("span", |v, l| p.real(&v, l, "span")) {
        spec.bootstrap.span = span;
    }
    if let Some(b) = read!("bandwidth", |v, l| {
        match p.call(&v, l, "bandwidth") {
            Some(("silverman", a)) if a.is_empty() => Some(BandwidthRule::Silverman),
            Some(("fixed", a)) => p.real_call(&a, 1, l, "bandwidth").map(|h| BandwidthRule::Fixed(h[0])),
            Some(_) => {
                p.error(Some(l), format!("unknown bandwidth `{v}` (silverman, fixed(h))"));
                None
            }
            None => None,
        }
    }) {
        spec.bootstrap.bandwidth = b;
    }
    if method == Method::Bootstrap {
        if let Err(e) = spec.bootstrap.validate() {
            ok = fail(p, s.line, format!("bootstrap settings: {e}"));
        }
    }

    let algorithm_line = s.get("algorithm").map(|(v, l)| (v.to_string(), l));
    let mh_keys = ["proposal_scale", "burn_in", "init"];
    let declared_mh = matches!(&algorithm_line, Some((v, _)) if v == "mh");
    match algorithm_line {
        None => {}
        Some((v, _)) if v == "is" => {}
        Some((v, l)) if v == "mh" => {
            let dim = model.map(|m| m.param_names().len());
            let scale = match s.get("proposal_scale") {
                Some((raw, sl)) => {
                    let raw = raw.to_string();
                    p.reals(&raw, sl, "proposal_scale").and_then(|v| {
                        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                            p.error(Some(sl), "proposal scales must be finite and >= 0");
                            None
                        } else if dim.is_some_and(|d| d != v.len()) {
                            p.error(Some(sl), format!("`proposal_scale` needs {} values", dim.unwrap()));
                            None
                        } else {
                            Some(v)
                        }
                    })
                }
                None => {
                    p.error(Some(l), "algorithm = mh needs `proposal_scale`");
                    None
                }
            };
            let burn_in = match s.get("burn_in") {
                Some((raw, bl)) => {
                    let raw = raw.to_string();
                    p.number::<usize>(&raw, bl, "burn_in").and_then(|b| {
                        if b >= iterations {
                            p.error(Some(bl), format!("need burn_in < S, got burn_in = {b} and S = {iterations}"));
                            None
                        } else {
                            Some(b)
                        }
                    })
                }
                None => Some(0),
            };
            let init = match s.get("init") {
                Some((raw, il)) => {
                    let raw = raw.to_string();
                    match p.reals(&raw, il, "init") {
                        Some(v) if dim.is_some_and(|d| d != v.len()) => {
                            p.error(Some(il), format!("`init` needs {} values", dim.unwrap()));
                            None
                        }
                        Some(v) => Some(Some(v)),
                        None => None,
                    }
                }
                None => Some(None),
            };
            match (scale, burn_in, init) {
                (Some(proposal_scale), Some(burn_in), Some(init)) => {
                    spec.algorithm = Algorithm::Mh {
                        proposal_scale,
                        burn_in,
                        init,
                    }
                }
                _ => ok = false,
            }
        }
        Some((v, l)) => {
            ok = fail(p, l, format!("unknown algorithm `{v}` (is, mh)"));
        }
    }
    if !declared_mh {
        for key in mh_keys {
            if let Some((_, l)) = s.get(key) {
                ok = fail(p, l, format!("`{key}` applies only to algorithm = mh"));
            }
        }
    }
    ok.then_some(spec)
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn float(x: f64) -> String {
    toml::Value::Float(x).to_string()
}

fn floats(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&x| float(x)).collect::<Vec<_>>().join(", "))
}

fn marginal_text(m: &Marginal) -> String {
    match *m {
        Marginal::Uniform { lo, hi } => format!("uniform({lo}, {hi})"),
        Marginal::Normal { mean, sd } => format!("normal({mean}, {sd})"),
        Marginal::LogNormal { mu, sigma } => format!("lognormal({mu}, {sigma})"),
    }
}

/// Seeds beyond the TOML integer range are written as strings.
fn seed_text(seed: u64) -> String {
    if i64::try_from(seed).is_ok() {
        seed.to_string()
    } else {
        quoted(&seed.to_string())
    }
}

/// Canonical TOML of a configuration; `parse_config(&emit_config(c)) == c`.
pub fn emit_config(c: &RunFile) -> String {
    let mut out = String::new();
    let w = &mut out;
    w.push_str("[model]\n");
    let _ = writeln!(w, "kind = {}", quoted(c.model.kind()));
    match &c.model {
        ModelSpec::Gk { n, c } => {
            let _ = writeln!(w, "n = {n}\nc = {}", float(*c));
        }
        ModelSpec::Potts { rows, cols, k, sweeps } => {
            let _ = writeln!(w, "rows = {rows}\ncols = {cols}\nk = {k}\nsweeps = {sweeps}");
        }
        ModelSpec::MixedEffects { blocks, trend, noise } => {
            let _ = writeln!(w, "blocks = [{}]", join(blocks));
            let design = if *trend { "intercept_trend" } else { "intercept" };
            let _ = writeln!(w, "design = {}", quoted(design));
            let noise = match noise {
                NoiseFamily::Normal => "normal".to_string(),
                NoiseFamily::StudentT { nu } => format!("student_t({nu})"),
            };
            let _ = writeln!(w, "noise = {}", quoted(&noise));
        }
        ModelSpec::ConjugateNormal { n, sd } => {
            let _ = writeln!(w, "n = {n}\nsd = {}", float(*sd));
        }
        ModelSpec::Bernoulli { n } => {
            let _ = writeln!(w, "n = {n}");
        }
    }

    w.push_str("\n[data]\n");
    match &c.data {
        DataSpec::File(path) => {
            let _ = writeln!(w, "file = {}", quoted(&path.display().to_string()));
        }
        DataSpec::Simulated { truth, seed } => {
            let _ = writeln!(w, "truth = {}\nseed = {}", floats(truth), seed_text(*seed));
        }
    }

    w.push_str("\n[prior]\n");
    for (name, m) in &c.prior {
        let _ = writeln!(w, "{name} = {}", quoted(&marginal_text(m)));
    }

    let s = &c.sampler;
    w.push_str("\n[sampler]\n");
    match &s.algorithm {
        Algorithm::Is => w.push_str("algorithm = \"is\"\n"),
        Algorithm::Mh {
            proposal_scale,
            burn_in,
            init,
        } => {
            let _ = writeln!(
                w,
                "algorithm = \"mh\"\nproposal_scale = {}\nburn_in = {burn_in}",
                floats(proposal_scale)
            );
            if let Some(init) = init {
                let _ = writeln!(w, "init = {}", floats(init));
            }
        }
    }
    let _ = writeln!(w, "method = {}", quoted(s.method.name()));
    let _ = writeln!(
        w,
        "S = {}\nN = {}\nseed = {}\nworkers = {}",
        s.iterations,
        s.n,
        seed_text(s.seed),
        s.workers
    );
    let statistic = match &s.statistic {
        StatisticChoice::Default => None,
        StatisticChoice::Identity => Some("identity".to_string()),
        StatisticChoice::Moments(o) => Some(format!("moments({})", join(o))),
        StatisticChoice::Quantiles(q) => Some(format!("quantiles({})", join(q))),
        StatisticChoice::Potts => Some("potts".to_string()),
        StatisticChoice::Mixed => Some("mixed".to_string()),
    };
    if let Some(statistic) = statistic {
        let _ = writeln!(w, "statistic = {}", quoted(&statistic));
    }
    if s.method.uses_distance() {
        let distance = match s.distance {
            DistanceChoice::Euclidean => "euclidean",
            DistanceChoice::Mad => "mad",
        };
        let _ = writeln!(w, "distance = {}", quoted(distance));
        match s.tolerance {
            Some(ToleranceRule::Fixed(e)) => {
                let _ = writeln!(w, "tolerance = {}", quoted(&format!("fixed({e})")));
            }
            Some(ToleranceRule::Quantile { q, pilot }) => {
                let _ = writeln!(w, "tolerance = {}\npilot = {pilot}", quoted(&format!("quantile({q})")));
            }
            None => {}
        }
    }
    match s.method {
        Method::Kernel => {
            let kernel = match s.kernel {
                KernelKind::Epanechnikov => "epanechnikov",
                KernelKind::Gaussian => "gaussian",
            };
            let _ = writeln!(w, "kernel = {}", quoted(kernel));
        }
        Method::Coupled => {
            let _ = writeln!(w, "coupling_draws = {}", s.coupling_draws);
        }
        Method::Synthetic => {
            let _ = writeln!(w, "ridge = {}", float(s.ridge));
        }
        Method::Empirical => {
            let _ = writeln!(w, "constraints = {}", quoted(s.constraints.name()));
        }
        Method::Bootstrap => {
            let b = &s.bootstrap;
            let _ = writeln!(w, "J = {}\nK = {}\nspan = {}", b.j, b.k, float(b.span));
            let bandwidth = match b.bandwidth {
                BandwidthRule::Silverman => "silverman".to_string(),
                BandwidthRule::Fixed(h) => format!("fixed({h})"),
            };
            let _ = writeln!(w, "bandwidth = {}", quoted(&bandwidth));
        }
        Method::Rejection => {}
    }
    out
}
