use std::sync::Arc;

use crate::error::{AbcError, Result};
use crate::params::ParamVector;

use super::weights::{effective_sample_size, max_log_weight};

/// ESS of the sample had the tolerance been the pilot `quantile`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceDiagnostic {
    pub quantile: f64,
    pub epsilon: f64,
    pub accepted: usize,
    pub ess: f64,
}

/// Weighted posterior draws `(theta_s, w_s, w_bar_s)`.
///
/// Raw weights are stored as `exp(log w_s - max log w)`, so the largest is
/// 1; the shift is kept in [`WeightedSample::log_shift`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    names: Arc<[String]>,
    values: Vec<f64>,
    log_weights: Vec<f64>,
    raw: Vec<f64>,
    normalized: Vec<f64>,
    log_shift: f64,
    ess: f64,
    accepted: usize,
    pub(crate) epsilon: Option<f64>,
    pub(crate) diagnostics: Vec<ToleranceDiagnostic>,
    pub(crate) extrapolated: usize,
    pub(crate) acceptance_rate: Option<f64>,
}

impl WeightedSample {
    /// `values` holds the draws row by row, `names.len()` values each.
    pub fn from_log_weights(
        names: Arc<[String]>,
        values: Vec<f64>,
        log_weights: Vec<f64>,
    ) -> Result<Self> {
        let d = names.len();
        if d == 0 || values.len() != d * log_weights.len() {
            return Err(AbcError::DimensionMismatch {
                expected: d * log_weights.len(),
                actual: values.len(),
            });
        }
        let max = max_log_weight(&log_weights)?;
        let (raw, log_shift) = if max == f64::NEG_INFINITY {
            (vec![0.0; log_weights.len()], 0.0)
        } else {
            (log_weights.iter().map(|&l| (l - max).exp()).collect(), max)
        };
        let total: f64 = raw.iter().sum();
        let normalized: Vec<f64> = if total > 0.0 {
            raw.iter().map(|w| w / total).collect()
        } else {
            raw.clone()
        };
        let ess = effective_sample_size(&raw);
        let accepted = raw.iter().filter(|&&w| w > 0.0).count();
        Ok(Self {
            names,
            values,
            log_weights,
            raw,
            normalized,
            log_shift,
            ess,
            accepted,
            epsilon: None,
            diagnostics: Vec::new(),
            extrapolated: 0,
            acceptance_rate: None,
        })
    }

    /// Builds a sample from non-negative raw weights.
    pub fn from_weights(names: Arc<[String]>, values: Vec<f64>, weights: &[f64]) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if w.is_nan() || w < 0.0 {
                return Err(AbcError::NegativeWeight(w, i));
            }
        }
        Self::from_log_weights(names, values, weights.iter().map(|w| w.ln()).collect())
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Number of draws `S`.
    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn theta(&self, s: usize) -> &[f64] {
        let d = self.dim();
        &self.values[s * d..(s + 1) * d]
    }

    pub fn draw(&self, s: usize) -> ParamVector {
        ParamVector::new(self.theta(s).to_vec(), Arc::clone(&self.names))
            .expect("stored draws are finite")
    }

    pub fn thetas(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim())
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn raw_weights(&self) -> &[f64] {
        &self.raw
    }

    pub fn normalized_weights(&self) -> &[f64] {
        &self.normalized
    }

    /// `max log w`, so that `w_s = raw_s * exp(log_shift)`.
    pub fn log_shift(&self) -> f64 {
        self.log_shift
    }

    /// `1 / sum w_bar^2`; 0 for a degenerate sample.
    pub fn ess(&self) -> f64 {
        self.ess
    }

    /// Draws with a positive weight.
    pub fn accepted_count(&self) -> usize {
        self.accepted
    }

    /// Every weight is zero.
    pub fn is_degenerate(&self) -> bool {
        self.accepted == 0
    }

    /// Tolerance or bandwidth used by a distance-based kernel.
    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn diagnostics(&self) -> &[ToleranceDiagnostic] {
        &self.diagnostics
    }

    /// Draws whose bootstrap-likelihood value was extrapolated.
    pub fn extrapolated_count(&self) -> usize {
        self.extrapolated
    }

    /// Fraction of Metropolis-Hastings proposals that moved the chain.
    pub fn acceptance_rate(&self) -> Option<f64> {
        self.acceptance_rate
    }
}

/// Self-normalised estimate `sum w_bar_s g(theta_s)`.
pub fn posterior_expectation<G>(sample: &WeightedSample, g: G) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    if sample.is_degenerate() {
        return Err(AbcError::Degenerate);
    }
    let mut acc: Option<Vec<f64>> = None;
    for (theta, &w) in sample.thetas().zip(sample.normalized_weights()) {
        if w == 0.0 {
            continue;
        }
        let v = g(theta);
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| w * x).collect()),
            Some(a) => {
                if a.len() != v.len() {
                    return Err(AbcError::DimensionMismatch {
                        expected: a.len(),
                        actual: v.len(),
                    });
                }
                for (ai, vi) in a.iter_mut().zip(&v) {
                    *ai += w * vi;
                }
            }
        }
    }
    Ok(acc.expect("non-degenerate sample has a positive weight"))
}

pub fn posterior_mean(sample: &WeightedSample) -> Result<Vec<f64>> {
    posterior_expectation(sample, <[f64]>::to_vec)
}

/// Weighted standard deviation per component.
pub fn posterior_sd(sample: &WeightedSample) -> Result<Vec<f64>> {
    let mean = posterior_mean(sample)?;
    let second = posterior_expectation(sample, |t| t.iter().map(|x| x * x).collect())?;
    Ok(mean
        .iter()
        .zip(&second)
        .map(|(m, s)| (s - m * m).max(0.0).sqrt())
        .collect())
}

/// Weighted empirical quantiles, `result[component][prob]`: the smallest
/// positively weighted draw whose cumulative weight reaches `p`.
pub fn posterior_quantiles(sample: &WeightedSample, probs: &[f64]) -> Result<Vec<Vec<f64>>> {
    if sample.is_degenerate() {
        return Err(AbcError::Degenerate);
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(AbcError::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    let w = sample.normalized_weights();
    (0..sample.dim())
        .map(|c| {
            let mut atoms: Vec<(f64, f64)> = sample
                .thetas()
                .zip(w)
                .filter(|(_, &wi)| wi > 0.0)
                .map(|(t, &wi)| (t[c], wi))
                .collect();
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cumulative = Vec::with_capacity(atoms.len());
            let mut total = 0.0;
            for (_, wi) in &atoms {
                total += wi;
                cumulative.push(total);
            }
            Ok(probs
                .iter()
                .map(|&p| {
                    // relative slack absorbs rounding in the running sum
                    let target = p * total * (1.0 - 1e-12);
                    let i = cumulative.partition_point(|&c| c < target);
                    atoms[i.min(atoms.len() - 1)].0
                })
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_names;

    fn sample(values: Vec<f64>, weights: &[f64]) -> WeightedSample {
        WeightedSample::from_weights(default_names(1), values, weights).unwrap()
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(posterior_mean(&sample(vec![1.0, 3.0], &[1.0, 1.0])).unwrap(), vec![2.0]);
        assert_eq!(posterior_mean(&sample(vec![5.0, 99.0], &[1.0, 0.0])).unwrap(), vec![5.0]);
        assert_eq!(
            posterior_mean(&sample(vec![1.0, 2.0], &[0.0, 0.0])),
            Err(AbcError::Degenerate)
        );
    }

    #[test]
    fn quantile_examples() {
        let s = sample(vec![1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]);
        assert_eq!(posterior_quantiles(&s, &[0.5]).unwrap(), vec![vec![2.0]]);
        let s = sample(vec![0.0, 100.0], &[0.9, 0.1]);
        assert_eq!(posterior_quantiles(&s, &[0.5]).unwrap(), vec![vec![0.0]]);
        let s = sample(vec![7.0, -3.0, 12.0, 50.0], &[1.0, 2.0, 0.5, 0.0]);
        assert_eq!(posterior_quantiles(&s, &[0.0, 1.0]).unwrap(), vec![vec![-3.0, 12.0]]);
        let s = sample(vec![1.0, 2.0, 3.0, 4.0], &[1.0; 4]);
        assert_eq!(posterior_quantiles(&s, &[0.5]).unwrap(), vec![vec![2.0]]);
    }

    #[test]
    fn raw_weights_are_shifted() {
        let s = WeightedSample::from_log_weights(
            default_names(1),
            vec![0.0, 1.0],
            vec![-1000.0, -1001.0],
        )
        .unwrap();
        assert_eq!(s.raw_weights()[0], 1.0);
        assert_eq!(s.log_shift(), -1000.0);
        assert!((s.normalized_weights()[0] - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert_eq!(s.accepted_count(), 2);
    }

    #[test]
    fn sd_of_two_points() {
        let s = sample(vec![1.0, 3.0], &[1.0, 1.0]);
        assert!((posterior_sd(&s).unwrap()[0] - 1.0).abs() < 1e-15);
    }
}
