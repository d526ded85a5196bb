use super::Dataset;
use crate::conditional::{Condition, KeyMask};
use crate::error::{domain, Result};

/// Exact per-key statistics of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub frequency: Vec<f64>,
    /// `None` for keys nobody holds.
    pub mean: Vec<Option<f64>>,
    pub users: usize,
}

pub fn true_stats(ds: &Dataset) -> GroundTruth {
    let d = ds.domain_size();
    let mut holders = vec![0u64; d];
    let mut sums = vec![0.0f64; d];
    for r in ds.records() {
        for &(k, v) in r.pairs() {
            holders[k as usize] += 1;
            sums[k as usize] += v;
        }
    }
    let n = ds.users() as f64;
    GroundTruth {
        frequency: holders.iter().map(|&h| h as f64 / n).collect(),
        mean: holders
            .iter()
            .zip(&sums)
            .map(|(&h, &s)| (h > 0).then(|| s / h as f64))
            .collect(),
        users: ds.users(),
    }
}

/// Exact conditional statistics; `None` where the relevant population is
/// empty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalTruth {
    pub frequency: Option<f64>,
    pub mean: Option<f64>,
    /// Users matching the condition.
    pub support: usize,
}

/// Brute-force conditional frequency and mean of key `k` among users whose
/// key-existence pattern matches `cond`.
pub fn true_conditional(ds: &Dataset, k: usize, cond: &Condition) -> Result<ConditionalTruth> {
    let d = ds.domain_size();
    if cond.len() != d {
        return Err(domain(format!(
            "condition over {} keys for a dataset over {d}",
            cond.len()
        )));
    }
    if k >= d {
        return Err(domain(format!("key index {k} outside [0, {d})")));
    }
    if cond.alpha().get(k) {
        return Err(domain(format!(
            "target key k{} is already constrained",
            k + 1
        )));
    }
    let mut support = 0usize;
    let mut holders = 0usize;
    let mut sum = 0.0;
    for r in ds.records() {
        let gamma = KeyMask::from_keys(d, r.pairs().iter().map(|&(key, _)| key as usize))?;
        if !cond.matches(gamma) {
            continue;
        }
        support += 1;
        if let Some(v) = r.get(k) {
            holders += 1;
            sum += v;
        }
    }
    Ok(ConditionalTruth {
        frequency: (support > 0).then(|| holders as f64 / support as f64),
        mean: (holders > 0).then(|| sum / holders as f64),
        support,
    })
}
