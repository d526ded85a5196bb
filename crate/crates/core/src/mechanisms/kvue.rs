//! KVUE: the discretized key-value state treated as one of three categories
//! and perturbed by generalized randomized response.

use rand::Rng;

use super::report::{Mechanism, Payload, Report};
use super::stats::{conditioned, StateCounts, StateEstimates};
use super::{sample_key, true_state};
use crate::error::Result;
use crate::primitives::{check_epsilon, direct_encode, keep_probability, DiscretizedState};
use crate::record::KeyValueRecord;

pub fn kvue_encode<R: Rng + ?Sized>(
    record: &KeyValueRecord,
    epsilon: f64,
    rng: &mut R,
) -> Result<Report> {
    check_epsilon(epsilon)?;
    let j = sample_key(record, rng);
    let state = true_state(record, j, rng)?;
    let out = direct_encode(state.into(), 3, epsilon, rng)?;
    Report::new(
        Mechanism::Kvue,
        j as u32,
        Payload::State(DiscretizedState::try_from(out)?),
    )
}

/// `table[s][o] = Pr[report o | true state s]`, rows and columns by digit.
pub fn kvue_table(epsilon: f64) -> Result<Vec<Vec<f64>>> {
    crate::primitives::direct_encode_table(3, epsilon)
}

pub fn kvue_decode(counts: &StateCounts, epsilon: f64) -> Result<StateEstimates> {
    check_epsilon(epsilon)?;
    let p = keep_probability(epsilon, 3);
    let denom = conditioned("3p - 1", 3.0 * p - 1.0)?;
    let m = counts.total() as f64;
    let calibrate = |c: u64| (2.0 * c as f64 - (1.0 - p) * m) / denom;
    Ok(StateEstimates {
        absent: calibrate(counts.absent),
        pos: calibrate(counts.pos),
        neg: calibrate(counts.neg),
        total: m,
    })
}

/// Variance of one calibrated count (direct-encoding approximation).
pub fn kvue_variance(n: f64, epsilon: f64) -> f64 {
    let e = epsilon.exp();
    n * (e + 1.0) / ((e - 1.0) * (e - 1.0))
}
