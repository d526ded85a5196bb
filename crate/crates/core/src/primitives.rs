//! Randomized-response building blocks shared by every mechanism.

use rand::Rng;

use crate::error::{domain, Error, Result};

/// Budget of one user report, split between the key and the value channel.
///
/// `key + value == total` always holds (sequential composition).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    total: f64,
    key: f64,
    value: f64,
}

impl PrivacyBudget {
    /// Even split `ε₁ = ε₂ = ε/2`.
    pub fn even(total: f64) -> Result<Self> {
        check_epsilon(total)?;
        Ok(Self {
            total,
            key: total / 2.0,
            value: total / 2.0,
        })
    }

    /// Explicit split; the total is their sum.
    pub fn split(key: f64, value: f64) -> Result<Self> {
        check_epsilon(key)?;
        check_epsilon(value)?;
        Ok(Self {
            total: key + value,
            key,
            value,
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// ε₁, spent on the key bit.
    pub fn key(&self) -> f64 {
        self.key
    }

    /// ε₂, spent on the value sign.
    pub fn value(&self) -> f64 {
        self.value
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )))
    }
}

fn check_unit(v: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain(format!("value {v} outside [-1, 1]")))
    }
}

/// One uniform draw, always consumed, compared against `p`.
#[inline]
pub(crate) fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Ternary state of one key after discretization.
///
/// The discriminant is the canonical digit `k·v* + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum DiscretizedState {
    /// ⟨1, −1⟩
    Neg = 0,
    /// ⟨0, 0⟩
    Absent = 1,
    /// ⟨1, 1⟩
    Pos = 2,
}

impl DiscretizedState {
    pub const ALL: [DiscretizedState; 3] = [Self::Neg, Self::Absent, Self::Pos];

    pub fn digit(self) -> u8 {
        self as u8
    }

    pub fn from_digit(digit: u8) -> Option<Self> {
        match digit {
            0 => Some(Self::Neg),
            1 => Some(Self::Absent),
            2 => Some(Self::Pos),
            _ => None,
        }
    }

    /// State of a present key with sign `v*`.
    pub fn present(sign: i8) -> Self {
        if sign > 0 {
            Self::Pos
        } else {
            Self::Neg
        }
    }

    pub fn key_bit(self) -> u8 {
        u8::from(self != Self::Absent)
    }

    /// `v*`, zero for an absent key.
    pub fn value(self) -> i8 {
        self.digit() as i8 - 1
    }
}

/// Maps `v ∈ [−1, 1]` to `+1` with probability `(1+v)/2`, else `−1`.
pub fn discretize<R: Rng + ?Sized>(v: f64, rng: &mut R) -> Result<i8> {
    check_unit(v)?;
    Ok(if bernoulli(rng, (1.0 + v) / 2.0) {
        1
    } else {
        -1
    })
}

/// `e^ε / (e^ε + 1)`.
pub fn flip_keep_probability(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(keep_probability(epsilon, 2))
}

/// `e^ε / (e^ε + k − 1)`, evaluated without overflow for large ε.
pub(crate) fn keep_probability(epsilon: f64, k: usize) -> f64 {
    1.0 / (1.0 + (k as f64 - 1.0) * (-epsilon).exp())
}

pub fn randomized_response_bit<R: Rng + ?Sized>(bit: u8, epsilon: f64, rng: &mut R) -> Result<u8> {
    if bit > 1 {
        return Err(domain(format!("expected a bit, got {bit}")));
    }
    let p = flip_keep_probability(epsilon)?;
    Ok(if bernoulli(rng, p) { bit } else { 1 - bit })
}

/// Generalized randomized response over `k` categories.
pub fn direct_encode<R: Rng + ?Sized>(
    x: usize,
    k: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    if k < 2 {
        return Err(domain(format!(
            "direct encoding needs at least 2 categories, got {k}"
        )));
    }
    if x >= k {
        return Err(domain(format!("category {x} outside [0, {k})")));
    }
    check_epsilon(epsilon)?;
    let p = keep_probability(epsilon, k);
    if bernoulli(rng, p) {
        Ok(x)
    } else {
        let other = rng.random_range(0..k - 1);
        Ok(if other >= x { other + 1 } else { other })
    }
}

/// `table[x][o] = Pr[direct_encode(x) = o]`.
pub fn direct_encode_table(k: usize, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    if k < 2 {
        return Err(domain(format!(
            "direct encoding needs at least 2 categories, got {k}"
        )));
    }
    check_epsilon(epsilon)?;
    let p = keep_probability(epsilon, k);
    let q = (1.0 - p) / (k as f64 - 1.0);
    Ok((0..k)
        .map(|x| (0..k).map(|o| if o == x { p } else { q }).collect())
        .collect())
}

/// Largest `Pr[o | x] / Pr[o | x']` over all rows and outputs of a
/// conditional probability table.
pub fn max_likelihood_ratio(table: &[Vec<f64>]) -> f64 {
    let outputs = table.first().map_or(0, Vec::len);
    (0..outputs)
        .map(|o| {
            let hi = table.iter().map(|row| row[o]).fold(f64::MIN, f64::max);
            let lo = table.iter().map(|row| row[o]).fold(f64::MAX, f64::min);
            hi / lo
        })
        .fold(1.0, f64::max)
}

/// Value perturbation primitive: discretize, then randomized response on the
/// sign. Returns `±1`.
pub fn vpp<R: Rng + ?Sized>(v: f64, epsilon: f64, rng: &mut R) -> Result<i8> {
    let sign = discretize(v, rng)?;
    let p = flip_keep_probability(epsilon)?;
    Ok(if bernoulli(rng, p) { sign } else { -sign })
}

/// `Pr[vpp(v, ε) = 1]`.
pub fn vpp_positive_probability(v: f64, epsilon: f64) -> Result<f64> {
    check_unit(v)?;
    let p = flip_keep_probability(epsilon)?;
    let up = (1.0 + v) / 2.0;
    Ok(up * p + (1.0 - up) * (1.0 - p))
}

impl From<DiscretizedState> for usize {
    fn from(s: DiscretizedState) -> usize {
        s.digit() as usize
    }
}

impl TryFrom<usize> for DiscretizedState {
    type Error = Error;

    fn try_from(digit: usize) -> Result<Self> {
        u8::try_from(digit)
            .ok()
            .and_then(Self::from_digit)
            .ok_or_else(|| domain(format!("invalid ternary digit {digit}")))
    }
}
