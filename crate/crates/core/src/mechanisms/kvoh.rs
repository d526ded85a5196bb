//! KVOH: one-hot state array with per-bit randomized response at ε/2.

use rand::Rng;

use super::report::{Mechanism, Payload, Report};
use super::stats::{conditioned, StateEstimates};
use super::{sample_key, true_state};
use crate::error::{domain, Result};
use crate::primitives::{bernoulli, check_epsilon, keep_probability, DiscretizedState};
use crate::record::KeyValueRecord;

/// Per-position sums of received KVOH arrays for one key.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BitSums {
    /// Indexed by state digit.
    pub sums: [u64; 3],
    pub reports: u64,
}

impl BitSums {
    pub fn add(&mut self, bits: [bool; 3]) {
        for (s, b) in self.sums.iter_mut().zip(bits) {
            *s += u64::from(b);
        }
        self.reports += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for (s, o) in self.sums.iter_mut().zip(other.sums) {
            *s += o;
        }
        self.reports += other.reports;
    }
}

pub fn kvoh_encode<R: Rng + ?Sized>(
    record: &KeyValueRecord,
    epsilon: f64,
    rng: &mut R,
) -> Result<Report> {
    check_epsilon(epsilon)?;
    let j = sample_key(record, rng);
    let hot = usize::from(true_state(record, j, rng)?);
    let keep = keep_probability(epsilon / 2.0, 2);
    let mut bits = [false; 3];
    for (i, bit) in bits.iter_mut().enumerate() {
        let truth = i == hot;
        *bit = if bernoulli(rng, keep) { truth } else { !truth };
    }
    Report::new(Mechanism::Kvoh, j as u32, Payload::Bits(bits))
}

/// `Pr[output array | true state]` for all 8 arrays; rows by state digit,
/// columns by array read as a big-endian 3-bit number.
pub fn kvoh_table(epsilon: f64) -> Result<Vec<Vec<f64>>> {
    check_epsilon(epsilon)?;
    let keep = keep_probability(epsilon / 2.0, 2);
    Ok(DiscretizedState::ALL
        .iter()
        .map(|&s| {
            (0..8u8)
                .map(|o| {
                    (0..3)
                        .map(|i| {
                            let bit = o >> (2 - i) & 1 == 1;
                            if bit == (i == s.digit()) {
                                keep
                            } else {
                                1.0 - keep
                            }
                        })
                        .product()
                })
                .collect()
        })
        .collect())
}

/// Per-position calibration. The three estimates are not renormalized and
/// need not sum to the report count.
pub fn kvoh_decode(sums: &BitSums, epsilon: f64) -> Result<StateEstimates> {
    check_epsilon(epsilon)?;
    if sums.sums.iter().any(|&s| s > sums.reports) {
        return Err(domain("bit sum exceeds the number of reports"));
    }
    let e = (epsilon / 2.0).exp();
    let denom = conditioned("e^(eps/2) - 1", e - 1.0)?;
    let n = sums.reports as f64;
    let calibrate = |i: usize| ((e + 1.0) * sums.sums[i] as f64 - n) / denom;
    Ok(StateEstimates {
        neg: calibrate(0),
        absent: calibrate(1),
        pos: calibrate(2),
        total: n,
    })
}

pub fn kvoh_variance(n: f64, epsilon: f64) -> f64 {
    let e = (epsilon / 2.0).exp();
    n * e / ((e - 1.0) * (e - 1.0))
}
