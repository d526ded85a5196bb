use super::f2m::F2mCounts;
use super::kvoh::BitSums;
use super::report::{Mechanism, Payload, Report};
use super::stats::StateCounts;
use crate::error::{domain, Result};

/// Per-key aggregates for one mechanism. Merging is associative and
/// commutative, so partial tallies can be combined in any order.
#[derive(Clone, Debug, PartialEq)]
pub enum Tallies {
    States(Vec<StateCounts>),
    F2m(Vec<F2mCounts>),
    Bits(Vec<BitSums>),
}

impl Tallies {
    pub fn new(mechanism: Mechanism, d: usize) -> Self {
        match mechanism {
            Mechanism::PrivKv | Mechanism::Kvue => Self::States(vec![StateCounts::default(); d]),
            Mechanism::F2m => Self::F2m(vec![F2mCounts::default(); d]),
            Mechanism::Kvoh => Self::Bits(vec![BitSums::default(); d]),
        }
    }

    pub fn domain_size(&self) -> usize {
        match self {
            Self::States(v) => v.len(),
            Self::F2m(v) => v.len(),
            Self::Bits(v) => v.len(),
        }
    }

    pub fn absorb(&mut self, report: &Report) -> Result<()> {
        let j = report.key_index();
        if j >= self.domain_size() {
            return Err(domain(format!("report key index {j} outside tally domain")));
        }
        match (self, report.payload()) {
            (Self::States(v), Payload::State(s)) => v[j].add(s),
            (Self::F2m(v), Payload::KeyValue { key_bit, sign }) => v[j].add(key_bit, sign),
            (Self::Bits(v), Payload::Bits(bits)) => v[j].add(bits),
            _ => {
                return Err(domain(format!(
                    "{} report does not fit this tally",
                    report.mechanism()
                )))
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.domain_size() != other.domain_size() {
            return Err(domain("cannot merge tallies over different key domains"));
        }
        match (self, other) {
            (Self::States(a), Self::States(b)) => a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y)),
            (Self::F2m(a), Self::F2m(b)) => a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y)),
            (Self::Bits(a), Self::Bits(b)) => a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y)),
            _ => return Err(domain("cannot merge tallies of different mechanisms")),
        }
        Ok(())
    }

    /// Number of reports that sampled key `j`.
    pub fn reports_for(&self, j: usize) -> u64 {
        match self {
            Self::States(v) => v[j].total(),
            Self::F2m(v) => v[j].total(),
            Self::Bits(v) => v[j].reports,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::DiscretizedState;

    #[test]
    fn absorb_and_merge() {
        let mut a = Tallies::new(Mechanism::Kvue, 3);
        let mut b = Tallies::new(Mechanism::Kvue, 3);
        let r = Report::new(Mechanism::Kvue, 1, Payload::State(DiscretizedState::Pos)).unwrap();
        a.absorb(&r).unwrap();
        b.absorb(&r).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.reports_for(1), 2);
        assert_eq!(a.reports_for(0), 0);

        let wrong = Report::new(Mechanism::Kvoh, 0, Payload::Bits([true, false, false])).unwrap();
        assert!(a.absorb(&wrong).is_err());
        assert!(a.merge(&Tallies::new(Mechanism::F2m, 3)).is_err());
        assert!(a.merge(&Tallies::new(Mechanism::Kvue, 4)).is_err());
    }
}
