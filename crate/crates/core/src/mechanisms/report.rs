//! Client reports: in-memory form, bit-packed form, and the one-line text form
//! used for on-disk traces.
//!
//! Text form is `mechanism,key_index,payload`:
//!
//! | mechanism | payload                                   | example        |
//! |-----------|-------------------------------------------|----------------|
//! | `privkv`  | ternary digit `k·v*+1`                    | `privkv,17,2`  |
//! | `kvue`    | ternary digit `k·v*+1`                    | `kvue,3,1`     |
//! | `f2m`     | key bit then value bit (`1` = +1)         | `f2m,3,01`     |
//! | `kvoh`    | bits `A[0] A[1] A[2]`                     | `kvoh,9,110`   |

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::primitives::DiscretizedState;

/// Single-key perturbation mechanisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    PrivKv,
    F2m,
    Kvue,
    Kvoh,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [Self::PrivKv, Self::F2m, Self::Kvue, Self::Kvoh];

    pub fn name(self) -> &'static str {
        match self {
            Self::PrivKv => "privkv",
            Self::F2m => "f2m",
            Self::Kvue => "kvue",
            Self::Kvoh => "kvoh",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| domain(format!("unknown mechanism '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    /// PrivKV and KVUE: one of the three discretized states.
    State(DiscretizedState),
    /// F2M: perturbed key bit and value sign, always both present.
    KeyValue { key_bit: u8, sign: i8 },
    /// KVOH: perturbed one-hot array, indexed by state digit.
    Bits([bool; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Report {
    mechanism: Mechanism,
    key_index: u32,
    payload: Payload,
}

impl Report {
    pub fn new(mechanism: Mechanism, key_index: u32, payload: Payload) -> Result<Self> {
        let ok = match (mechanism, payload) {
            (Mechanism::PrivKv | Mechanism::Kvue, Payload::State(_)) => true,
            (Mechanism::F2m, Payload::KeyValue { key_bit, sign }) => {
                key_bit <= 1 && (sign == 1 || sign == -1)
            }
            (Mechanism::Kvoh, Payload::Bits(_)) => true,
            _ => false,
        };
        if !ok {
            return Err(domain(format!(
                "payload {payload:?} does not fit mechanism {mechanism}"
            )));
        }
        Ok(Self {
            mechanism,
            key_index,
            payload,
        })
    }

    pub fn mechanism(&self) -> Mechanism {
        self.mechanism
    }

    pub fn key_index(&self) -> usize {
        self.key_index as usize
    }

    pub fn payload(&self) -> Payload {
        self.payload
    }

    /// Dense bit encoding for a key domain of size `d`.
    ///
    /// PrivKV and KVUE pack `3·index + digit` into `⌈log₂ 3d⌉` bits; F2M and
    /// KVOH append their 2 or 3 payload bits to a `⌈log₂ d⌉`-bit index.
    pub fn pack(&self, d: usize) -> Result<PackedReport> {
        if self.key_index() >= d {
            return Err(domain(format!(
                "key index {} outside [0, {d})",
                self.key_index
            )));
        }
        let index = u128::from(self.key_index);
        let packed = match self.payload {
            Payload::State(s) => PackedReport {
                value: index * 3 + u128::from(s.digit()),
                bits: ceil_log2(3 * d as u128),
            },
            Payload::KeyValue { key_bit, sign } => PackedReport {
                value: (index << 2) | u128::from(key_bit) << 1 | u128::from(sign > 0),
                bits: ceil_log2(d as u128) + 2,
            },
            Payload::Bits(bits) => PackedReport {
                value: (index << 3)
                    | bits
                        .iter()
                        .enumerate()
                        .fold(0u128, |acc, (i, &b)| acc | u128::from(b) << (2 - i)),
                bits: ceil_log2(d as u128) + 3,
            },
        };
        Ok(packed)
    }

    pub fn unpack(mechanism: Mechanism, d: usize, packed: PackedReport) -> Result<Self> {
        let bad = || {
            domain(format!(
                "packed value {} invalid for {mechanism} with d = {d}",
                packed.value
            ))
        };
        let (index, payload) = match mechanism {
            Mechanism::PrivKv | Mechanism::Kvue => {
                let digit = (packed.value % 3) as u8;
                (
                    packed.value / 3,
                    Payload::State(DiscretizedState::from_digit(digit).ok_or_else(bad)?),
                )
            }
            Mechanism::F2m => (
                packed.value >> 2,
                Payload::KeyValue {
                    key_bit: ((packed.value >> 1) & 1) as u8,
                    sign: if packed.value & 1 == 1 { 1 } else { -1 },
                },
            ),
            Mechanism::Kvoh => {
                let v = packed.value;
                (v >> 3, Payload::Bits([v & 4 != 0, v & 2 != 0, v & 1 != 0]))
            }
        };
        if index >= d as u128 {
            return Err(bad());
        }
        Self::new(mechanism, index as u32, payload)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},", self.mechanism, self.key_index)?;
        match self.payload {
            Payload::State(s) => write!(f, "{}", s.digit()),
            Payload::KeyValue { key_bit, sign } => write!(f, "{}{}", key_bit, u8::from(sign > 0)),
            Payload::Bits(bits) => bits.iter().try_for_each(|&b| write!(f, "{}", u8::from(b))),
        }
    }
}

impl FromStr for Report {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut parts = line.trim().split(',');
        let (Some(mech), Some(index), Some(payload), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(domain(format!(
                "expected 'mechanism,key_index,payload', got '{line}'"
            )));
        };
        let mechanism: Mechanism = mech.parse()?;
        let key_index: u32 = index
            .trim()
            .parse()
            .map_err(|_| domain(format!("bad key index '{index}'")))?;
        let payload = payload.trim();
        let bits: Vec<bool> = payload
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(()),
            })
            .collect::<std::result::Result<_, _>>()
            .unwrap_or_default();
        let payload = match mechanism {
            Mechanism::PrivKv | Mechanism::Kvue => payload
                .parse::<u8>()
                .ok()
                .and_then(DiscretizedState::from_digit)
                .map(Payload::State),
            Mechanism::F2m if bits.len() == 2 && payload.len() == 2 => Some(Payload::KeyValue {
                key_bit: u8::from(bits[0]),
                sign: if bits[1] { 1 } else { -1 },
            }),
            Mechanism::Kvoh if bits.len() == 3 && payload.len() == 3 => {
                Some(Payload::Bits([bits[0], bits[1], bits[2]]))
            }
            _ => None,
        }
        .ok_or_else(|| domain(format!("bad {mechanism} payload '{payload}'")))?;
        Self::new(mechanism, key_index, payload)
    }
}

/// A report packed into the low `bits` bits of `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackedReport {
    pub value: u128,
    pub bits: u32,
}

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub(crate) fn ceil_log2(n: u128) -> u32 {
    debug_assert!(n >= 1);
    u128::BITS - (n - 1).leading_zeros()
}
