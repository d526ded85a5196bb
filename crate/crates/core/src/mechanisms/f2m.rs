//! F2M: key and value perturbed independently, absent keys carry a default
//! value so every report holds a value sign.

use rand::Rng;

use super::report::{Mechanism, Payload, Report};
use super::sample_key;
use super::stats::{conditioned, KeyStats};
use crate::error::{domain, Result};
use crate::primitives::{
    flip_keep_probability, randomized_response_bit, vpp, vpp_positive_probability, PrivacyBudget,
};
use crate::record::KeyValueRecord;

/// Value used for absent keys unless configured otherwise.
pub const DEFAULT_VALUE: f64 = 1.0;

/// Per-key aggregate of F2M reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct F2mCounts {
    pub key_ones: u64,
    pub value_pos: u64,
    pub value_neg: u64,
}

impl F2mCounts {
    pub fn total(&self) -> u64 {
        self.value_pos + self.value_neg
    }

    pub fn add(&mut self, key_bit: u8, sign: i8) {
        self.key_ones += u64::from(key_bit);
        if sign > 0 {
            self.value_pos += 1;
        } else {
            self.value_neg += 1;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.key_ones += other.key_ones;
        self.value_pos += other.value_pos;
        self.value_neg += other.value_neg;
    }
}

pub fn f2m_encode<R: Rng + ?Sized>(
    record: &KeyValueRecord,
    budget: &PrivacyBudget,
    default_value: f64,
    rng: &mut R,
) -> Result<Report> {
    if !(-1.0..=1.0).contains(&default_value) {
        return Err(domain(format!(
            "default value {default_value} outside [-1, 1]"
        )));
    }
    let j = sample_key(record, rng);
    let value = record.get(j);
    let key_bit = randomized_response_bit(u8::from(value.is_some()), budget.key(), rng)?;
    let sign = vpp(value.unwrap_or(default_value), budget.value(), rng)?;
    Report::new(
        Mechanism::F2m,
        j as u32,
        Payload::KeyValue { key_bit, sign },
    )
}

pub fn f2m_decode(
    counts: &F2mCounts,
    budget: &PrivacyBudget,
    default_value: f64,
) -> Result<KeyStats> {
    let total = counts.total();
    if total == 0 {
        return Ok(KeyStats::undefined(0));
    }
    let n = total as f64;
    let e1 = budget.key().exp();
    let e2 = budget.value().exp();
    let p1 = e1 / (e1 + 1.0);
    let d1 = conditioned("2p1 - 1", 2.0 * p1 - 1.0)?;
    conditioned("e^eps2 - 1", e2 - 1.0)?;

    let observed = counts.key_ones as f64 / n;
    let frequency = ((p1 - 1.0 + observed) / d1).clamp(0.0, 1.0);

    let mean_all =
        (e2 + 1.0) / (e2 - 1.0) * (counts.value_pos as f64 - counts.value_neg as f64) / n;
    let mean = (frequency >= 1.0 / n)
        .then(|| ((mean_all - (1.0 - frequency) * default_value) / frequency).clamp(-1.0, 1.0));
    Ok(KeyStats {
        frequency: Some(frequency),
        mean,
        support: total,
    })
}

/// `Pr[(key bit, sign) | input]` for the inputs "holds the key with value
/// −1", "holds it with value +1" and "does not hold it" (rows). Columns are
/// `(0,−) (0,+) (1,−) (1,+)`.
pub fn f2m_table(budget: &PrivacyBudget, default_value: f64) -> Result<Vec<Vec<f64>>> {
    let p1 = flip_keep_probability(budget.key())?;
    let row = |key_one: f64, plus: f64| {
        vec![
            (1.0 - key_one) * (1.0 - plus),
            (1.0 - key_one) * plus,
            key_one * (1.0 - plus),
            key_one * plus,
        ]
    };
    Ok(vec![
        row(p1, vpp_positive_probability(-1.0, budget.value())?),
        row(p1, vpp_positive_probability(1.0, budget.value())?),
        row(
            1.0 - p1,
            vpp_positive_probability(default_value, budget.value())?,
        ),
    ])
}
