//! Weight normalisation and the effective sample size.

use crate::error::{AbcError, Result};
use crate::real::Real;

/// `w_s / sum w`. All-zero input gives all zeros (a degenerate sample).
///
/// Weights are divided by their maximum before summing so that very
/// large or very small raw weights neither overflow nor underflow.
pub fn normalize_weights<F: Real>(raw: &[F]) -> Result<Vec<F>> {
    let mut max = F::zero();
    for (i, &w) in raw.iter().enumerate() {
        if w.is_nan() || w < F::zero() {
            return Err(AbcError::NegativeWeight(w.to_f64().unwrap_or(f64::NAN), i));
        }
        if w.is_infinite() {
            return Err(AbcError::InvalidParameter(format!("infinite weight at index {i}")));
        }
        max = max.max(w);
    }
    if max == F::zero() {
        return Ok(vec![F::zero(); raw.len()]);
    }
    let scaled: Vec<F> = raw.iter().map(|&w| w / max).collect();
    let total = scaled.iter().fold(F::zero(), |a, &b| a + b);
    Ok(scaled.into_iter().map(|w| w / total).collect())
}

/// Normalises weights given as logarithms, shifting by the maximum first.
/// All `-inf` input gives all zeros.
pub fn normalize_log_weights<F: Real>(log_weights: &[F]) -> Result<Vec<F>> {
    let max = max_log_weight(log_weights)?;
    if max == F::neg_infinity() {
        return Ok(vec![F::zero(); log_weights.len()]);
    }
    let shifted: Vec<F> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let total = shifted.iter().fold(F::zero(), |a, &b| a + b);
    Ok(shifted.into_iter().map(|w| w / total).collect())
}

/// Largest log weight; `-inf` when every weight is zero.
pub(crate) fn max_log_weight<F: Real>(log_weights: &[F]) -> Result<F> {
    let mut max = F::neg_infinity();
    for (i, &l) in log_weights.iter().enumerate() {
        if l.is_nan() || l == F::infinity() {
            return Err(AbcError::InvalidParameter(format!("log weight {l} at index {i}")));
        }
        max = max.max(l);
    }
    Ok(max)
}

/// `1 / sum(w_s^2)` for normalised weights; 0 for an all-zero sample.
///
/// Computed as `(sum w)^2 / sum w^2` on weights scaled by their maximum,
/// which is invariant to normalisation, exact for equal weights, and
/// clamped to `[1, S]`.
pub fn effective_sample_size<F: Real>(weights: &[F]) -> F {
    let max = weights.iter().fold(F::zero(), |m, &w| m.max(w));
    if !(max > F::zero()) {
        return F::zero();
    }
    let (sum, sum_sq) = weights.iter().fold((F::zero(), F::zero()), |(s, q), &w| {
        let v = w / max;
        (s + v, q + v * v)
    });
    (sum * sum / sum_sq).max(F::one()).min(F::from_usize_lossy(weights.len()))
}
