//! Counting operators over a calibrated aggregate and the conditional
//! frequency and mean queries built on them.

use super::index::{frequency_index_set, mean_index_sets, Condition, KeyMask};
use super::ioh::AggregateVector;
use crate::error::{domain, Result};

/// Denominators that round to zero calibrated users give an undefined result.
pub const MIN_SUPPORT: f64 = 0.5;

fn check_shape(agg: &AggregateVector, cond: &Condition) -> Result<()> {
    if cond.len() != agg.d {
        return Err(domain(format!(
            "condition over {} keys does not match aggregate over {}",
            cond.len(),
            agg.d
        )));
    }
    Ok(())
}

fn sum_at(agg: &AggregateVector, indices: &[usize]) -> f64 {
    indices.iter().map(|&i| agg.values[i]).sum()
}

/// `F^α_β`: calibrated number of users whose existence pattern on `α` is `β`.
pub fn frequency_count(agg: &AggregateVector, cond: &Condition) -> Result<f64> {
    check_shape(agg, cond)?;
    // index sets of distinct patterns are disjoint, so summing per pattern
    // covers the union exactly once
    Ok(cond
        .patterns()
        .map(|g| sum_at(agg, &frequency_index_set(g)))
        .sum())
}

/// `S`: plus-valued minus minus-valued mass of key `k` over users matching
/// `cond`. `cond` must already require `k` to be present.
pub fn mean_sum(agg: &AggregateVector, k: usize, cond: &Condition) -> Result<f64> {
    check_shape(agg, cond)?;
    if !(cond.alpha().get(k) && cond.beta().get(k)) {
        return Err(domain(format!(
            "condition {cond} must require key k{} present",
            k + 1
        )));
    }
    cond.patterns().try_fold(0.0, |acc, g: KeyMask| {
        let (plus, minus) = mean_index_sets(k, g)?;
        Ok(acc + sum_at(agg, &plus) - sum_at(agg, &minus))
    })
}

fn with_target(k: usize, cond: &Condition) -> Result<Condition> {
    if k >= cond.len() {
        return Err(domain(format!("key index {k} outside [0, {})", cond.len())));
    }
    if cond.alpha().get(k) {
        return Err(domain(format!(
            "target key k{} is already constrained",
            k + 1
        )));
    }
    (*cond).require(k, true)
}

/// Fraction of users matching `cond` that hold key `k`, or `None` when the
/// conditioned population is degenerate.
pub fn conditional_frequency(
    agg: &AggregateVector,
    k: usize,
    cond: &Condition,
) -> Result<Option<f64>> {
    let forced = with_target(k, cond)?;
    let denominator = frequency_count(agg, cond)?;
    if denominator < MIN_SUPPORT {
        return Ok(None);
    }
    let numerator = frequency_count(agg, &forced)?;
    Ok(Some((numerator / denominator).clamp(0.0, 1.0)))
}

/// Mean value of key `k` over users matching `cond` that hold it, or `None`
/// when that population is degenerate.
pub fn conditional_mean(agg: &AggregateVector, k: usize, cond: &Condition) -> Result<Option<f64>> {
    let forced = with_target(k, cond)?;
    let denominator = frequency_count(agg, &forced)?;
    if denominator < MIN_SUPPORT {
        return Ok(None);
    }
    let s = mean_sum(agg, k, &forced)?;
    Ok(Some((s / denominator).clamp(-1.0, 1.0)))
}
