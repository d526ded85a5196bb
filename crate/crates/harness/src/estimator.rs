//! The estimators compared by the harness: each single-key mechanism paired
//! with its decoder. PrivKV appears twice, once per calibration.

use std::fmt;
use std::str::FromStr;

use kvldp_core::mechanisms::{
    counts_to_stats, f2m_decode, f2m_encode, kvoh_decode, kvoh_encode, kvue_decode, kvue_encode,
    lpp_encode, privkv_decode_improved, privkv_decode_original, KeyStats, Mechanism, Report,
    Tallies,
};
use kvldp_core::{KeyValueRecord, PrivacyBudget, Result};
use rand::Rng;

use crate::error::{config, HarnessError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    PrivKvOriginal,
    PrivKvImproved,
    F2m,
    Kvue,
    Kvoh,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Self::PrivKvOriginal,
        Self::PrivKvImproved,
        Self::F2m,
        Self::Kvue,
        Self::Kvoh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PrivKvOriginal => "privkv-original",
            Self::PrivKvImproved => "privkv-improved",
            Self::F2m => "f2m",
            Self::Kvue => "kvue",
            Self::Kvoh => "kvoh",
        }
    }

    pub fn mechanism(self) -> Mechanism {
        match self {
            Self::PrivKvOriginal | Self::PrivKvImproved => Mechanism::PrivKv,
            Self::F2m => Mechanism::F2m,
            Self::Kvue => Mechanism::Kvue,
            Self::Kvoh => Mechanism::Kvoh,
        }
    }

    /// Whether a closed-form error bound exists for this estimator.
    pub fn has_bound(self) -> bool {
        !matches!(self.mechanism(), Mechanism::PrivKv)
    }

    /// Budget that enters this estimator's closed-form bound: the per-channel
    /// share for F2M, the full budget otherwise.
    pub fn bound_epsilon(self, epsilon: f64) -> Result<f64> {
        Ok(match self.mechanism() {
            Mechanism::F2m => PrivacyBudget::even(epsilon)?.key(),
            _ => epsilon,
        })
    }

    /// Client side. Two-channel mechanisms split `epsilon` evenly.
    pub fn encode<R: Rng + ?Sized>(
        self,
        record: &KeyValueRecord,
        epsilon: f64,
        vbar: f64,
        rng: &mut R,
    ) -> Result<Report> {
        match self.mechanism() {
            Mechanism::PrivKv => lpp_encode(record, &PrivacyBudget::even(epsilon)?, rng),
            Mechanism::F2m => f2m_encode(record, &PrivacyBudget::even(epsilon)?, vbar, rng),
            Mechanism::Kvue => kvue_encode(record, epsilon, rng),
            Mechanism::Kvoh => kvoh_encode(record, epsilon, rng),
        }
    }

    /// Aggregator side: per-key statistics from this mechanism's tallies.
    pub fn decode(self, tallies: &Tallies, epsilon: f64, vbar: f64) -> Result<Vec<KeyStats>> {
        let mismatch = || kvldp_core::Error::Domain(format!("tallies do not belong to {self}"));
        match (self, tallies) {
            (Self::PrivKvOriginal, Tallies::States(v)) => {
                let b = PrivacyBudget::even(epsilon)?;
                v.iter().map(|c| privkv_decode_original(c, &b)).collect()
            }
            (Self::PrivKvImproved, Tallies::States(v)) => {
                let b = PrivacyBudget::even(epsilon)?;
                v.iter()
                    .map(|c| Ok(counts_to_stats(&privkv_decode_improved(c, &b)?, c.total())))
                    .collect()
            }
            (Self::Kvue, Tallies::States(v)) => v
                .iter()
                .map(|c| Ok(counts_to_stats(&kvue_decode(c, epsilon)?, c.total())))
                .collect(),
            (Self::F2m, Tallies::F2m(v)) => {
                let b = PrivacyBudget::even(epsilon)?;
                v.iter().map(|c| f2m_decode(c, &b, vbar)).collect()
            }
            (Self::Kvoh, Tallies::Bits(v)) => v
                .iter()
                .map(|s| Ok(counts_to_stats(&kvoh_decode(s, epsilon)?, s.reports)))
                .collect(),
            _ => Err(mismatch()),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "privkv" => Ok(Self::PrivKvImproved),
            _ => Self::ALL
                .into_iter()
                .find(|e| e.name() == s)
                .ok_or_else(|| config(format!("unknown mechanism '{s}'"))),
        }
    }
}

/// Parses a comma-separated mechanism list; `all` selects every estimator.
pub fn parse_estimators(list: &str) -> Result<Vec<Estimator>, HarnessError> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Estimator::ALL.to_vec());
    }
    let mut out: Vec<Estimator> = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let e: Estimator = part.parse()?;
        if !out.contains(&e) {
            out.push(e);
        }
    }
    if out.is_empty() {
        return Err(config("no mechanisms selected"));
    }
    Ok(out)
}
