//! Local perturbation protocol (PrivKV) with the original aggregator
//! calibration and the improved three-state estimator.

use rand::Rng;

use super::report::{Mechanism, Payload, Report};
use super::sample_key;
use super::stats::{conditioned, KeyStats, StateCounts, StateEstimates};
use crate::error::Result;
use crate::primitives::{
    bernoulli, flip_keep_probability, vpp, vpp_positive_probability, DiscretizedState,
    PrivacyBudget,
};
use crate::record::KeyValueRecord;

pub fn lpp_encode<R: Rng + ?Sized>(
    record: &KeyValueRecord,
    budget: &PrivacyBudget,
    rng: &mut R,
) -> Result<Report> {
    let j = sample_key(record, rng);
    let p1 = flip_keep_probability(budget.key())?;
    let state = match record.get(j) {
        Some(v) => {
            let sign = vpp(v, budget.value(), rng)?;
            if bernoulli(rng, p1) {
                DiscretizedState::present(sign)
            } else {
                DiscretizedState::Absent
            }
        }
        None => {
            // Fake value for a key the user does not hold; its law is
            // unspecified upstream, uniform keeps the fake signs balanced.
            let m = rng.random_range(-1.0..=1.0);
            let sign = vpp(m, budget.value(), rng)?;
            if bernoulli(rng, p1) {
                DiscretizedState::Absent
            } else {
                DiscretizedState::present(sign)
            }
        }
    };
    Report::new(Mechanism::PrivKv, j as u32, Payload::State(state))
}

/// PrivKV's own calibration: frequency from the key channel, mean from the
/// value signs of the reports that claim the key.
pub fn privkv_decode_original(counts: &StateCounts, budget: &PrivacyBudget) -> Result<KeyStats> {
    let m = counts.total();
    if m == 0 {
        return Ok(KeyStats::undefined(0));
    }
    let p1 = flip_keep_probability(budget.key())?;
    let p2 = flip_keep_probability(budget.value())?;
    let d1 = conditioned("2p1 - 1", 2.0 * p1 - 1.0)?;
    let d2 = conditioned("2p2 - 1", 2.0 * p2 - 1.0)?;

    let claimed = (counts.pos + counts.neg) as f64;
    let observed = claimed / m as f64;
    let frequency = ((p1 - 1.0 + observed) / d1).clamp(0.0, 1.0);

    let mean = (claimed > 0.0).then(|| {
        let base = (p2 - 1.0) / d2 * claimed;
        let n_pos = (base + counts.pos as f64 / d2).clamp(0.0, claimed);
        let n_neg = (base + counts.neg as f64 / d2).clamp(0.0, claimed);
        ((n_pos - n_neg) / claimed).clamp(-1.0, 1.0)
    });
    Ok(KeyStats {
        frequency: Some(frequency),
        mean,
        support: m,
    })
}

/// Unbiased estimates of the true state counts behind LPP reports.
pub fn privkv_decode_improved(
    counts: &StateCounts,
    budget: &PrivacyBudget,
) -> Result<StateEstimates> {
    let p1 = flip_keep_probability(budget.key())?;
    let p2 = flip_keep_probability(budget.value())?;
    let p1c = conditioned("2p1 - 1", 2.0 * p1 - 1.0)?;
    let p2c = conditioned("2p2 - 1", 2.0 * p2 - 1.0)?;

    let m = counts.total() as f64;
    let (m_pos, m_neg) = (counts.pos as f64, counts.neg as f64);
    let a = p1 * p2c;
    let denom = 2.0 * p1 * p1c * p2c;
    let shift = a * (1.0 - p1) * m;
    let pos = ((a + p1c) * m_pos + (a - p1c) * m_neg - shift) / denom;
    let neg = ((a - p1c) * m_pos + (a + p1c) * m_neg - shift) / denom;
    Ok(StateEstimates {
        absent: m - pos - neg,
        pos,
        neg,
        total: m,
    })
}

/// `Pr[state | input]` for the inputs "holds the key with value −1", "holds
/// it with value +1" and "does not hold it" (rows), over output states in
/// digit order (columns). Interior values mix the first two rows.
pub fn lpp_table(budget: &PrivacyBudget) -> Result<Vec<Vec<f64>>> {
    let p1 = flip_keep_probability(budget.key())?;
    let row = |present: bool, plus: f64| {
        DiscretizedState::ALL
            .iter()
            .map(|&s| match (present, s) {
                (true, DiscretizedState::Absent) => 1.0 - p1,
                (true, DiscretizedState::Pos) => p1 * plus,
                (true, DiscretizedState::Neg) => p1 * (1.0 - plus),
                (false, DiscretizedState::Absent) => p1,
                // the fake value is uniform, so its sign is a fair coin
                (false, _) => (1.0 - p1) / 2.0,
            })
            .collect::<Vec<f64>>()
    };
    Ok(vec![
        row(true, vpp_positive_probability(-1.0, budget.value())?),
        row(true, vpp_positive_probability(1.0, budget.value())?),
        row(false, 0.5),
    ])
}
