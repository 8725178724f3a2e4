//! Parameter points and observed / simulated data sets.

use std::sync::Arc;

use crate::error::{AbcError, Result};

/// A point in parameter space with named components.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    names: Arc<[String]>,
}

impl ParamVector {
    /// Builds a parameter point; every value must be finite and the name
    /// list must match in length.
    pub fn new(values: Vec<f64>, names: Arc<[String]>) -> Result<Self> {
        if values.len() != names.len() {
            return Err(AbcError::DimensionMismatch {
                expected: names.len(),
                actual: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(AbcError::InvalidParameter(format!(
                "non-finite parameter value {bad}"
            )));
        }
        Ok(Self { values, names })
    }

    /// Parameter point with generated names `theta_1..theta_d`.
    pub fn unnamed(values: Vec<f64>) -> Result<Self> {
        let names = default_names(values.len());
        Self::new(values, names)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, Arc::clone(&self.names))
    }
}

pub fn default_names(d: usize) -> Arc<[String]> {
    (1..=d).map(|i| format!("theta_{i}")).collect()
}

/// Observations: a real vector, or a rectangular lattice of states in `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Continuous(Vec<f64>),
    Lattice(Lattice),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    rows: usize,
    cols: usize,
    k: u32,
    states: Vec<u32>,
}

impl Lattice {
    /// Row-major lattice; states must lie in `1..=k`.
    pub fn new(rows: usize, cols: usize, k: u32, states: Vec<u32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(AbcError::InvalidData("lattice must be non-empty".into()));
        }
        if states.len() != rows * cols {
            return Err(AbcError::DimensionMismatch {
                expected: rows * cols,
                actual: states.len(),
            });
        }
        if k < 1 {
            return Err(AbcError::InvalidData("state count k must be >= 1".into()));
        }
        if let Some(s) = states.iter().find(|&&s| s < 1 || s > k) {
            return Err(AbcError::InvalidData(format!(
                "lattice state {s} outside 1..={k}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            k,
            states,
        })
    }

    pub(crate) fn from_parts_unchecked(rows: usize, cols: usize, k: u32, states: Vec<u32>) -> Self {
        debug_assert_eq!(states.len(), rows * cols);
        Self {
            rows,
            cols,
            k,
            states,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    /// Number of first-order neighbour pairs with equal states.
    pub fn agreement_count(&self) -> usize {
        let (r, c) = (self.rows, self.cols);
        let s = &self.states;
        let mut count = 0;
        for i in 0..r {
            for j in 0..c {
                let here = s[i * c + j];
                if j + 1 < c && s[i * c + j + 1] == here {
                    count += 1;
                }
                if i + 1 < r && s[(i + 1) * c + j] == here {
                    count += 1;
                }
            }
        }
        count
    }

    /// Number of first-order neighbour pairs (lattice edges).
    pub fn edge_count(&self) -> usize {
        self.rows * (self.cols - 1) + self.cols * (self.rows - 1)
    }
}

impl Dataset {
    /// Continuous data set; must be non-empty.
    pub fn continuous(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(AbcError::InvalidData("data set must have n >= 1".into()));
        }
        Ok(Dataset::Continuous(values))
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Continuous(v) => v.len(),
            Dataset::Lattice(l) => l.states.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match self {
            Dataset::Continuous(v) => Some(v),
            Dataset::Lattice(_) => None,
        }
    }

    pub fn as_lattice(&self) -> Option<&Lattice> {
        match self {
            Dataset::Lattice(l) => Some(l),
            Dataset::Continuous(_) => None,
        }
    }

    /// Observations as reals; lattice states are widened.
    pub fn to_reals(&self) -> Vec<f64> {
        match self {
            Dataset::Continuous(v) => v.clone(),
            Dataset::Lattice(l) => l.states.iter().map(|&s| f64::from(s)).collect(),
        }
    }

    pub(crate) fn kind_name(&self) -> &'static str {
        match self {
            Dataset::Continuous(_) => "continuous",
            Dataset::Lattice(_) => "lattice",
        }
    }
}
