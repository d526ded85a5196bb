use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

use super::Dataset;
use crate::error::{domain, Error, Result};
use crate::record::KeyValueRecord;
use crate::rng::RandomSource;

const KEY_STREAM: u64 = 0x4B45;
const USER_STREAM: u64 = 0x5553;

/// Law of the per-key frequency and mean targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SyntheticLaw {
    Gaussian,
    Uniform,
}

impl SyntheticLaw {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Uniform => "uniform",
        }
    }
}

impl fmt::Display for SyntheticLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            _ => Err(domain(format!("unknown distribution '{s}'"))),
        }
    }
}

/// Law of one user's value around its key's center `m`, clipped to `[−1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueLaw {
    Gaussian { sd: f64 },
    Uniform { half_width: f64 },
}

impl Default for ValueLaw {
    fn default() -> Self {
        Self::Gaussian { sd: 0.1 }
    }
}

impl ValueLaw {
    fn validate(self) -> Result<Self> {
        let spread = match self {
            Self::Gaussian { sd } => sd,
            Self::Uniform { half_width } => half_width,
        };
        if !(spread.is_finite() && spread >= 0.0) {
            return Err(domain(format!(
                "value spread {spread} must be finite and non-negative"
            )));
        }
        Ok(self)
    }

    fn sample<R: Rng + ?Sized>(self, center: f64, rng: &mut R) -> f64 {
        let v = match self {
            Self::Gaussian { sd } => center + sd * rng.sample::<f64, _>(rand_distr::StandardNormal),
            Self::Uniform { half_width } => center + half_width * (2.0 * rng.random::<f64>() - 1.0),
        };
        v.clamp(-1.0, 1.0)
    }

    /// Expected value after clipping.
    pub fn expected(self, center: f64) -> f64 {
        match self {
            Self::Gaussian { sd } => clipped_normal_mean(center, sd, -1.0, 1.0),
            Self::Uniform { half_width } => {
                if half_width == 0.0 {
                    return center.clamp(-1.0, 1.0);
                }
                // piecewise: mass clipped at each end sits on the bound
                let (a, b) = (center - half_width, center + half_width);
                let w = b - a;
                let lo = a.max(-1.0);
                let hi = b.min(1.0);
                let inner = if hi > lo {
                    (hi * hi - lo * lo) / (2.0 * w)
                } else {
                    0.0
                };
                let below = -((-1.0 - a).max(0.0) / w).min(1.0);
                let above = ((b - 1.0).max(0.0) / w).min(1.0);
                inner + below + above
            }
        }
    }
}

impl fmt::Display for ValueLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { sd } => write!(f, "N(m,{sd})"),
            Self::Uniform { half_width } => write!(f, "U(m-{half_width},m+{half_width})"),
        }
    }
}

/// Mean of `clamp(X, lo, hi)` for `X ~ N(mu, sd²)`.
pub fn clipped_normal_mean(mu: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if sd == 0.0 {
        return mu.clamp(lo, hi);
    }
    let z = StdNormal::standard();
    let a = (lo - mu) / sd;
    let b = (hi - mu) / sd;
    lo * z.cdf(a) + hi * z.sf(b) + mu * (z.cdf(b) - z.cdf(a)) + sd * (z.pdf(a) - z.pdf(b))
}

/// Parameters of the per-key target laws.
///
/// Gaussian: `f ~ N(frequency_center, frequency_spread)` clipped to
/// `frequency_range`, `m ~ N(mean_center, mean_spread)` clipped to
/// `±mean_limit`, values `N(m, value_spread)`.
/// Uniform: `f ~ U(frequency_range)`, `m ~ U(−mean_limit, mean_limit)`,
/// values `U(m ± value_spread)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticParams {
    pub frequency_center: f64,
    pub frequency_spread: f64,
    pub frequency_range: (f64, f64),
    pub mean_center: f64,
    pub mean_spread: f64,
    pub mean_limit: f64,
    pub value_spread: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            frequency_center: 0.5,
            frequency_spread: 0.15,
            frequency_range: (0.05, 0.95),
            mean_center: 0.0,
            mean_spread: 0.4,
            mean_limit: 0.9,
            value_spread: 0.1,
        }
    }
}

impl SyntheticParams {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.frequency_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(domain(format!(
                "frequency range ({lo}, {hi}) must be ordered within [0, 1]"
            )));
        }
        if !(0.0..=1.0).contains(&self.mean_limit) {
            return Err(domain(format!(
                "mean limit {} outside [0, 1]",
                self.mean_limit
            )));
        }
        for (name, s) in [
            ("frequency spread", self.frequency_spread),
            ("mean spread", self.mean_spread),
            ("value spread", self.value_spread),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(domain(format!(
                    "{name} {s} must be finite and non-negative"
                )));
            }
        }
        if !self.frequency_center.is_finite() || !self.mean_center.is_finite() {
            return Err(domain("distribution centers must be finite"));
        }
        Ok(())
    }
}

/// Generator targets for one key: inclusion probability, value-law center
/// and the expected value after clipping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyTarget {
    pub frequency: f64,
    pub center: f64,
    pub mean: f64,
}

fn check_size(d: usize, n: usize) -> Result<()> {
    if d == 0 || n == 0 {
        return Err(domain(format!(
            "need d ≥ 1 and n ≥ 1, got d = {d}, n = {n}"
        )));
    }
    Ok(())
}

pub fn gen_synthetic(
    law: SyntheticLaw,
    d: usize,
    n: usize,
    params: &SyntheticParams,
    seed: u64,
) -> Result<Dataset> {
    check_size(d, n)?;
    params.validate()?;
    let (lo, hi) = params.frequency_range;
    let limit = params.mean_limit;
    let mut rng = RandomSource::new(seed, 0).derive(KEY_STREAM).rng();
    let (values, key_laws): (ValueLaw, Vec<(f64, f64)>) = match law {
        SyntheticLaw::Gaussian => {
            let fl = Normal::new(params.frequency_center, params.frequency_spread)
                .map_err(|e| domain(e.to_string()))?;
            let ml = Normal::new(params.mean_center, params.mean_spread)
                .map_err(|e| domain(e.to_string()))?;
            let keys = (0..d)
                .map(|_| {
                    (
                        fl.sample(&mut rng).clamp(lo, hi),
                        ml.sample(&mut rng).clamp(-limit, limit),
                    )
                })
                .collect();
            (
                ValueLaw::Gaussian {
                    sd: params.value_spread,
                },
                keys,
            )
        }
        SyntheticLaw::Uniform => {
            let keys = (0..d)
                .map(|_| {
                    let f = lo + (hi - lo) * rng.random::<f64>();
                    let m = limit * (2.0 * rng.random::<f64>() - 1.0);
                    (f, m)
                })
                .collect();
            (
                ValueLaw::Uniform {
                    half_width: params.value_spread,
                },
                keys,
            )
        }
    };
    let provenance = match law {
        SyntheticLaw::Gaussian => format!(
            "synthetic law=gaussian d={d} n={n} seed={seed} f=N({},{})[{lo},{hi}] m=N({},{})[-{limit},{limit}] v={values}",
            params.frequency_center, params.frequency_spread, params.mean_center, params.mean_spread
        ),
        SyntheticLaw::Uniform => {
            format!("synthetic law=uniform d={d} n={n} seed={seed} f=U({lo},{hi}) m=U(-{limit},{limit}) v={values}")
        }
    };
    generate(d, n, &key_laws, values, seed, provenance)
}

/// Target frequency shared by every key of a regime dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrequencyRegime {
    ExtremeLow,
    Low,
    Middle,
    High,
}

impl FrequencyRegime {
    pub const ALL: [Self; 4] = [Self::ExtremeLow, Self::Low, Self::Middle, Self::High];

    pub fn value(self) -> f64 {
        match self {
            Self::ExtremeLow => 0.05,
            Self::Low => 0.2,
            Self::Middle => 0.6,
            Self::High => 0.8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ExtremeLow => "extreme_low",
            Self::Low => "low",
            Self::Middle => "middle",
            Self::High => "high",
        }
    }
}

impl FromStr for FrequencyRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| domain(format!("unknown frequency regime '{s}'")))
    }
}

/// Value-law center shared by every key of a regime dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeanRegime {
    Low,
    Middle,
    High,
}

impl MeanRegime {
    pub const ALL: [Self; 3] = [Self::Low, Self::Middle, Self::High];

    pub fn value(self) -> f64 {
        match self {
            Self::Low => -0.8,
            Self::Middle => 0.0,
            Self::High => 0.8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Low => "low",
            Self::Middle => "middle",
            Self::High => "high",
        }
    }
}

impl FromStr for MeanRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| domain(format!("unknown mean regime '{s}'")))
    }
}

/// Every key pinned to the same frequency and value center.
pub fn gen_regime(
    frequency: FrequencyRegime,
    mean: MeanRegime,
    values: ValueLaw,
    d: usize,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    check_size(d, n)?;
    let values = values.validate()?;
    let provenance = format!(
        "regime frequency={} mean={} d={d} n={n} seed={seed} v={values}",
        frequency.name(),
        mean.name()
    );
    let key_laws = vec![(frequency.value(), mean.value()); d];
    generate(d, n, &key_laws, values, seed, provenance)
}

fn generate(
    d: usize,
    n: usize,
    key_laws: &[(f64, f64)],
    values: ValueLaw,
    seed: u64,
    provenance: String,
) -> Result<Dataset> {
    let users = RandomSource::new(seed, 0).derive(USER_STREAM);
    let records = (0..n as u64)
        .into_par_iter()
        .map(|u| {
            let mut rng = users.stream(u).rng();
            let pairs: Vec<(u32, f64)> = key_laws
                .iter()
                .enumerate()
                .filter_map(|(k, &(f, m))| {
                    if rng.random::<f64>() < f {
                        Some((k as u32, values.sample(m, &mut rng)))
                    } else {
                        None
                    }
                })
                .collect();
            KeyValueRecord::new(d, pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    let targets = key_laws
        .iter()
        .map(|&(frequency, center)| KeyTarget {
            frequency,
            center,
            mean: values.expected(center),
        })
        .collect();
    Ok(Dataset::new(d, records, provenance)?.with_targets(targets))
}
