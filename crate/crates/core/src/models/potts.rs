//! Potts model on a rectangular lattice with first-order neighbourhood.

use std::sync::Arc;

use rand::Rng;

use crate::error::{AbcError, Result};
use crate::params::{Dataset, Lattice, ParamVector};
use crate::rng::StreamRng;
use crate::simulator::Simulator;
use crate::special::log_sum_exp;
use crate::summaries::StatisticSpec;

/// Default number of Gibbs sweeps per simulated lattice.
pub const DEFAULT_SWEEPS: usize = 200;
/// Largest `k^n` the brute-force normaliser will enumerate.
pub const MAX_ENUMERATION: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PottsConfig {
    pub rows: usize,
    pub cols: usize,
    pub k: u32,
    /// Inverse temperature.
    pub theta: f64,
}

impl PottsConfig {
    pub fn new(rows: usize, cols: usize, k: u32, theta: f64) -> Result<Self> {
        let c = Self {
            rows,
            cols,
            k,
            theta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.k < 2 {
            return Err(AbcError::InvalidParameter(
                "Potts lattice must be non-empty with k >= 2".into(),
            ));
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(AbcError::InvalidParameter(format!(
                "inverse temperature must be >= 0, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rows * self.cols
    }
}

/// Single-site Gibbs sampler in raster order from a uniform random start.
///
/// Site `i` is redrawn from `P(y_i = j | rest) ∝ exp(theta * #{neighbours in state j})`.
pub fn gibbs_sample(config: &PottsConfig, sweeps: usize, rng: &mut StreamRng) -> Lattice {
    let (rows, cols, k) = (config.rows, config.cols, config.k as usize);
    // at most four neighbours agree with any candidate state
    let boltz: [f64; 5] = std::array::from_fn(|c| (config.theta * c as f64).exp());
    let mut s: Vec<u32> = (0..rows * cols)
        .map(|_| rng.random_range(1..=config.k))
        .collect();
    let mut counts = vec![0usize; k + 1];
    let mut weights = vec![0.0f64; k + 1];
    for _ in 0..sweeps {
        for i in 0..rows {
            for j in 0..cols {
                counts.iter_mut().for_each(|c| *c = 0);
                if i > 0 {
                    counts[s[(i - 1) * cols + j] as usize] += 1;
                }
                if i + 1 < rows {
                    counts[s[(i + 1) * cols + j] as usize] += 1;
                }
                if j > 0 {
                    counts[s[i * cols + j - 1] as usize] += 1;
                }
                if j + 1 < cols {
                    counts[s[i * cols + j + 1] as usize] += 1;
                }
                let mut total = 0.0;
                for state in 1..=k {
                    total += boltz[counts[state]];
                    weights[state] = total;
                }
                let target = rng.random::<f64>() * total;
                let new = (1..=k).find(|&st| target < weights[st]).unwrap_or(k);
                s[i * cols + j] = new as u32;
            }
        }
    }
    Lattice::from_parts_unchecked(rows, cols, config.k, s)
}

/// Brute-force normaliser of the Potts likelihood on a tiny lattice.
///
/// Stores how many of the `k^n` configurations have each agreement count.
#[derive(Debug, Clone)]
pub struct PottsPartition {
    config: PottsConfig,
    log_z: f64,
}

impl PottsPartition {
    pub fn new(config: &PottsConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n() as u32;
        let total = (config.k as u64)
            .checked_pow(n)
            .filter(|&t| t <= MAX_ENUMERATION)
            .ok_or_else(|| {
                AbcError::OracleTooLarge(format!(
                    "k^n = {}^{} exceeds {MAX_ENUMERATION}",
                    config.k, n
                ))
            })?;
        let edges = config.rows * (config.cols - 1) + config.cols * (config.rows - 1);
        let mut histogram = vec![0u64; edges + 1];
        let mut states = vec![1u32; config.n()];
        for _ in 0..total {
            let lattice =
                Lattice::from_parts_unchecked(config.rows, config.cols, config.k, states.clone());
            histogram[lattice.agreement_count()] += 1;
            // odometer increment over {1..k}^n
            for s in states.iter_mut() {
                if *s < config.k {
                    *s += 1;
                    break;
                }
                *s = 1;
            }
        }
        let terms: Vec<f64> = histogram
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(agree, &c)| (c as f64).ln() + config.theta * agree as f64)
            .collect();
        Ok(Self {
            config: *config,
            log_z: log_sum_exp(&terms),
        })
    }

    pub fn log_normaliser(&self) -> f64 {
        self.log_z
    }

    pub fn log_likelihood(&self, lattice: &Lattice) -> Result<f64> {
        if lattice.rows() != self.config.rows
            || lattice.cols() != self.config.cols
            || lattice.k() != self.config.k
        {
            return Err(AbcError::InvalidData(
                "lattice shape does not match the Potts configuration".into(),
            ));
        }
        Ok(self.config.theta * lattice.agreement_count() as f64 - self.log_z)
    }

    pub fn likelihood(&self, lattice: &Lattice) -> Result<f64> {
        self.log_likelihood(lattice).map(f64::exp)
    }
}

/// `exp(theta S(y)) / sum over all k^n configurations`, by enumeration.
pub fn potts_exact_likelihood(config: &PottsConfig, data: &Dataset) -> Result<f64> {
    let lattice = data
        .as_lattice()
        .ok_or_else(|| AbcError::InvalidData("Potts likelihood needs lattice data".into()))?;
    PottsPartition::new(config)?.likelihood(lattice)
}

/// Simulator with `theta = (inverse temperature)`.
#[derive(Debug, Clone)]
pub struct PottsModel {
    rows: usize,
    cols: usize,
    k: u32,
    sweeps: usize,
    names: Arc<[String]>,
}

impl PottsModel {
    pub fn new(rows: usize, cols: usize, k: u32, sweeps: usize) -> Result<Self> {
        PottsConfig::new(rows, cols, k, 0.0)?;
        if sweeps == 0 {
            return Err(AbcError::InvalidParameter("Gibbs sweeps must be >= 1".into()));
        }
        Ok(Self {
            rows,
            cols,
            k,
            sweeps,
            names: vec!["theta".to_string()].into(),
        })
    }

    pub fn config(&self, theta: &ParamVector) -> Result<PottsConfig> {
        if theta.dim() != 1 {
            return Err(AbcError::DimensionMismatch {
                expected: 1,
                actual: theta.dim(),
            });
        }
        PottsConfig::new(self.rows, self.cols, self.k, theta.get(0))
    }
}

impl Simulator for PottsModel {
    fn name(&self) -> &'static str {
        "potts"
    }

    fn dim(&self) -> usize {
        1
    }

    fn param_names(&self) -> Vec<String> {
        self.names.to_vec()
    }

    fn data_size(&self) -> usize {
        self.rows * self.cols
    }

    fn simulate(&self, theta: &ParamVector, rng: &mut StreamRng) -> Result<Dataset> {
        let config = self.config(theta)?;
        Ok(Dataset::Lattice(gibbs_sample(&config, self.sweeps, rng)))
    }

    fn default_statistic(&self) -> StatisticSpec {
        StatisticSpec::PottsSufficient
    }
}
