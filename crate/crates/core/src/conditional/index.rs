//! Key-existence patterns, conditions, and the base-3 index algebra that maps
//! them onto positions of the `3^d` indexing one-hot vector.
//!
//! Position of a full record is `Σ_i 3^(d−1−i) · s_i` where `s_i = k_i·v_i* + 1`
//! is the state digit of key `i` (0-based). Key 0 is the most significant
//! digit.

use std::fmt;

use crate::error::{domain, Error, Result};

/// Largest key domain the indexing one-hot encoding accepts by default.
pub const DEFAULT_CAPACITY: usize = 12;

/// Hard ceiling imposed by the `u32` mask representation.
const MASK_BITS: usize = 32;

/// A length-`d` bit vector over keys. Bit `i` refers to key `i`; the text
/// form lists key 0 first, e.g. `"101"`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyMask {
    bits: u32,
    d: usize,
}

impl KeyMask {
    pub fn new(d: usize, bits: u32) -> Result<Self> {
        if d == 0 || d > MASK_BITS {
            return Err(domain(format!("mask length {d} outside [1, {MASK_BITS}]")));
        }
        if d < MASK_BITS && bits >> d != 0 {
            return Err(domain(format!("mask {bits:#b} has bits beyond length {d}")));
        }
        Ok(Self { bits, d })
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(d, 0)
    }

    pub fn from_keys(d: usize, keys: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m = Self::zeros(d)?;
        for k in keys {
            m = m.with(k, true)?;
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.d && self.bits >> i & 1 == 1
    }

    pub fn with(self, i: usize, value: bool) -> Result<Self> {
        if i >= self.d {
            return Err(domain(format!("key {i} outside mask of length {}", self.d)));
        }
        let bits = if value {
            self.bits | 1 << i
        } else {
            self.bits & !(1 << i)
        };
        Ok(Self { bits, d: self.d })
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    fn and(self, other: Self) -> Self {
        Self {
            bits: self.bits & other.bits,
            d: self.d,
        }
    }
}

impl fmt::Display for KeyMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (0..self.d).try_for_each(|i| f.write_str(if self.get(i) { "1" } else { "0" }))
    }
}

impl fmt::Debug for KeyMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyMask({self})")
    }
}

impl std::str::FromStr for KeyMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0u32;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' if i < MASK_BITS => bits |= 1 << i,
                _ => return Err(domain(format!("invalid key mask '{s}'"))),
            }
        }
        Self::new(s.chars().count(), bits)
    }
}

/// Key-existence condition `(α, β)`: keys marked in `α` must exist iff their
/// bit in `β` is set. `β` is always a subset of `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Condition {
    alpha: KeyMask,
    beta: KeyMask,
}

impl Condition {
    pub fn new(alpha: KeyMask, beta: KeyMask) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(domain("alpha and beta differ in length"));
        }
        if beta.bits & !alpha.bits != 0 {
            return Err(domain(format!(
                "beta {beta} is not supported on alpha {alpha}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// The unconditioned population.
    pub fn empty(d: usize) -> Result<Self> {
        let z = KeyMask::zeros(d)?;
        Ok(Self { alpha: z, beta: z })
    }

    /// Builds a condition from `(key, must_exist)` pairs.
    pub fn from_pairs(d: usize, pairs: impl IntoIterator<Item = (usize, bool)>) -> Result<Self> {
        pairs
            .into_iter()
            .try_fold(Self::empty(d)?, |c, (k, exists)| c.require(k, exists))
    }

    /// Adds (or overrides) the requirement on key `k`.
    pub fn require(self, k: usize, exists: bool) -> Result<Self> {
        Ok(Self {
            alpha: self.alpha.with(k, true)?,
            beta: self.beta.with(k, exists)?,
        })
    }

    pub fn alpha(&self) -> KeyMask {
        self.alpha
    }

    pub fn beta(&self) -> KeyMask {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Whether a key-existence pattern `γ` satisfies the condition.
    pub fn matches(&self, gamma: KeyMask) -> bool {
        gamma.and(self.alpha).bits == self.beta.bits
    }

    /// Every existence pattern `γ` with `γ ∧ α = β`, ascending by bits.
    pub fn patterns(&self) -> impl Iterator<Item = KeyMask> + '_ {
        let full = if self.len() == MASK_BITS {
            u32::MAX
        } else {
            (1u32 << self.len()) - 1
        };
        let free = full & !self.alpha.bits;
        // enumerate the subsets of `free` in increasing order
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let sub = next?;
            next = if sub == free {
                None
            } else {
                Some((sub | !free).wrapping_add(1) & free)
            };
            Some(KeyMask {
                bits: self.beta.bits | sub,
                d: self.len(),
            })
        })
    }

    /// Parses `k3=1,k1=0` style conditions with 1-based key names. An empty
    /// string is the unconditioned population.
    pub fn parse(s: &str, d: usize) -> Result<Self> {
        let mut cond = Self::empty(d)?;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| domain(format!("condition '{part}' is not of the form kN=0|1")))?;
            let k = parse_key_name(key, d)?;
            let exists = match value.trim() {
                "0" => false,
                "1" => true,
                v => return Err(domain(format!("condition value '{v}' must be 0 or 1"))),
            };
            if cond.alpha.get(k) {
                return Err(domain(format!("key {} constrained twice", key.trim())));
            }
            cond = cond.require(k, exists)?;
        }
        Ok(cond)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.len())
            .filter(|&i| self.alpha.get(i))
            .map(|i| format!("k{}={}", i + 1, u8::from(self.beta.get(i))))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// `kN` (1-based) to a 0-based key index.
pub fn parse_key_name(name: &str, d: usize) -> Result<usize> {
    let name = name.trim();
    let n: usize = name
        .strip_prefix(['k', 'K'])
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| domain(format!("key name '{name}' is not of the form kN")))?;
    if n == 0 || n > d {
        return Err(domain(format!("key {name} outside k1..k{d}")));
    }
    Ok(n - 1)
}

/// `3^d`, failing beyond `cap`.
pub fn index_space(d: usize, cap: usize) -> Result<usize> {
    if d == 0 {
        return Err(domain("key domain must be non-empty"));
    }
    if d > cap {
        return Err(Error::Capacity { d, cap });
    }
    Ok(3usize.pow(d as u32))
}

/// Big-endian base-3 value of `digits`.
pub fn digits_to_index(digits: &[u8]) -> usize {
    digits.iter().fold(0usize, |acc, &s| acc * 3 + s as usize)
}

/// All indices whose digit at position `i` lies in `allowed[i]`, ascending.
fn enumerate(allowed: &[&[u8]]) -> Vec<usize> {
    let size: usize = allowed.iter().map(|a| a.len()).product();
    let mut out = Vec::with_capacity(size);
    if size == 0 {
        return out;
    }
    let mut cursor = vec![0usize; allowed.len()];
    loop {
        out.push(
            allowed
                .iter()
                .zip(&cursor)
                .fold(0usize, |acc, (a, &c)| acc * 3 + a[c] as usize),
        );
        // odometer: last position varies fastest, so output stays ascending
        let mut pos = allowed.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < allowed[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

const PRESENT: &[u8] = &[0, 2];
const ABSENT: &[u8] = &[1];
const PLUS: &[u8] = &[2];
const MINUS: &[u8] = &[0];

/// Positions of all records whose key-existence pattern is exactly `γ`.
pub fn frequency_index_set(gamma: KeyMask) -> Vec<usize> {
    let allowed: Vec<&[u8]> = (0..gamma.len())
        .map(|i| if gamma.get(i) { PRESENT } else { ABSENT })
        .collect();
    enumerate(&allowed)
}

/// Positions with pattern `γ` split by the sign of key `k`'s value.
pub fn mean_index_sets(k: usize, gamma: KeyMask) -> Result<(Vec<usize>, Vec<usize>)> {
    if !gamma.get(k) {
        return Err(domain(format!("key {k} must exist in pattern {gamma}")));
    }
    let mut allowed: Vec<&[u8]> = (0..gamma.len())
        .map(|i| if gamma.get(i) { PRESENT } else { ABSENT })
        .collect();
    allowed[k] = PLUS;
    let plus = enumerate(&allowed);
    allowed[k] = MINUS;
    let minus = enumerate(&allowed);
    Ok((plus, minus))
}
