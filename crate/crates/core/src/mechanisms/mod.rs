//! Single-key perturbation mechanisms and their aggregator-side estimators.
//!
//! Every encoder samples one key index `j` uniformly from the user's key
//! domain and reports only about that key. Decoders work on per-key
//! aggregates, so `N` in every formula is the number of reports that sampled
//! the key, not the user count.

mod bounds;
mod f2m;
mod kvoh;
mod kvue;
mod lpp;
mod report;
mod stats;
mod tally;

pub use bounds::{count_bound, report_size_bits, theoretical_bound, ErrorBounds};
pub use f2m::{f2m_decode, f2m_encode, f2m_table, F2mCounts, DEFAULT_VALUE};
pub use kvoh::{kvoh_decode, kvoh_encode, kvoh_table, kvoh_variance, BitSums};
pub use kvue::{kvue_decode, kvue_encode, kvue_table, kvue_variance};
pub use lpp::{lpp_encode, lpp_table, privkv_decode_improved, privkv_decode_original};
pub use report::{Mechanism, PackedReport, Payload, Report};
pub use stats::{counts_to_stats, KeyStats, StateCounts, StateEstimates};
pub use tally::Tallies;

use rand::Rng;

use crate::error::Result;
use crate::primitives::{discretize, DiscretizedState};
use crate::record::KeyValueRecord;

fn sample_key<R: Rng + ?Sized>(record: &KeyValueRecord, rng: &mut R) -> usize {
    rng.random_range(0..record.domain_size())
}

/// Discretized state of key `j`. Always consumes one uniform so the stream
/// position does not depend on whether the key is held.
fn true_state<R: Rng + ?Sized>(
    record: &KeyValueRecord,
    j: usize,
    rng: &mut R,
) -> Result<DiscretizedState> {
    let sign = discretize(record.get(j).unwrap_or(0.0), rng)?;
    Ok(if record.contains(j) {
        DiscretizedState::present(sign)
    } else {
        DiscretizedState::Absent
    })
}
