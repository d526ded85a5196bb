use crate::error::{Error, Result};
use crate::primitives::DiscretizedState;

/// Observed counts of the three received states for one key.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StateCounts {
    pub absent: u64,
    pub pos: u64,
    pub neg: u64,
}

impl StateCounts {
    pub fn new(absent: u64, pos: u64, neg: u64) -> Self {
        Self { absent, pos, neg }
    }

    pub fn total(&self) -> u64 {
        self.absent + self.pos + self.neg
    }

    pub fn add(&mut self, state: DiscretizedState) {
        match state {
            DiscretizedState::Absent => self.absent += 1,
            DiscretizedState::Pos => self.pos += 1,
            DiscretizedState::Neg => self.neg += 1,
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.absent += other.absent;
        self.pos += other.pos;
        self.neg += other.neg;
    }
}

/// Calibrated (unclipped) state counts for one key. `total` is the number of
/// reports the estimates were derived from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateEstimates {
    pub absent: f64,
    pub pos: f64,
    pub neg: f64,
    pub total: f64,
}

impl StateEstimates {
    pub fn get(&self, state: DiscretizedState) -> f64 {
        match state {
            DiscretizedState::Absent => self.absent,
            DiscretizedState::Pos => self.pos,
            DiscretizedState::Neg => self.neg,
        }
    }

    pub fn sum(&self) -> f64 {
        self.absent + self.pos + self.neg
    }
}

/// Final per-key statistics. `None` marks an estimate that is undefined
/// because its support is degenerate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyStats {
    pub frequency: Option<f64>,
    pub mean: Option<f64>,
    /// Number of reports used for this key.
    pub support: u64,
}

impl KeyStats {
    pub(crate) fn undefined(support: u64) -> Self {
        Self {
            frequency: None,
            mean: None,
            support,
        }
    }
}

/// Frequency and mean from calibrated state counts.
///
/// The two present-state counts are clipped to `[0, N]` first; the mean is
/// undefined when the clipped present mass is below one report.
pub fn counts_to_stats(est: &StateEstimates, n: u64) -> KeyStats {
    if n == 0 {
        return KeyStats::undefined(0);
    }
    let total = n as f64;
    let pos = est.pos.clamp(0.0, total);
    let neg = est.neg.clamp(0.0, total);
    let present = pos + neg;
    let frequency = (present / total).clamp(0.0, 1.0);
    let mean = (present >= 1.0).then(|| ((pos - neg) / present).clamp(-1.0, 1.0));
    KeyStats {
        frequency: Some(frequency),
        mean,
        support: n,
    }
}

/// Rejects calibrations whose denominator has collapsed.
pub(crate) fn conditioned(what: &'static str, value: f64) -> Result<f64> {
    if value.abs() < 1e-12 || !value.is_finite() {
        Err(Error::IllConditioned { what, value })
    } else {
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(absent: f64, pos: f64, neg: f64) -> StateEstimates {
        StateEstimates {
            absent,
            pos,
            neg,
            total: absent + pos + neg,
        }
    }

    #[test]
    fn symmetric_states() {
        let s = counts_to_stats(&est(0.0, 50.0, 50.0), 100);
        assert_eq!(s.frequency, Some(1.0));
        assert_eq!(s.mean, Some(0.0));
    }

    #[test]
    fn clipping_negative_state() {
        let s = counts_to_stats(&est(100.0, 20.0, -20.0), 100);
        assert!((s.frequency.unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(s.mean, Some(1.0));
    }

    #[test]
    fn exact_counts() {
        let s = counts_to_stats(&est(60.0, 30.0, 10.0), 100);
        assert!((s.frequency.unwrap() - 0.4).abs() < 1e-15);
        assert!((s.mean.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_support() {
        let s = counts_to_stats(&est(99.5, 0.4, 0.3), 100);
        assert!(s.frequency.is_some());
        assert_eq!(s.mean, None);
        let s = counts_to_stats(&est(0.0, 0.0, 0.0), 0);
        assert_eq!(s, KeyStats::undefined(0));
    }
}
