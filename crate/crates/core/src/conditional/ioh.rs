//! Indexing one-hot encoding of a whole record and its calibrated aggregate.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;

use super::index::{digits_to_index, index_space, DEFAULT_CAPACITY};
use crate::error::{domain, Error, Result};
use crate::primitives::{bernoulli, check_epsilon, discretize, keep_probability, DiscretizedState};
use crate::record::KeyValueRecord;
use crate::rng::RandomSource;

/// Sub-stream labels: discretization and bit perturbation draw from
/// independent streams derived from the user's source.
const DISCRETIZE_STREAM: u64 = 0xD15C;
const PERTURB_STREAM: u64 = 0xF11B;

/// Position of `record` in the `3^d` one-hot vector after discretizing every
/// present value.
pub fn ioh_index<R: Rng + ?Sized>(record: &KeyValueRecord, rng: &mut R) -> Result<usize> {
    ioh_index_with_capacity(record, DEFAULT_CAPACITY, rng)
}

pub fn ioh_index_with_capacity<R: Rng + ?Sized>(
    record: &KeyValueRecord,
    cap: usize,
    rng: &mut R,
) -> Result<usize> {
    let d = record.domain_size();
    index_space(d, cap)?;
    let mut digits = vec![DiscretizedState::Absent.digit(); d];
    for &(k, v) in record.pairs() {
        digits[k as usize] = DiscretizedState::present(discretize(v, rng)?).digit();
    }
    Ok(digits_to_index(&digits))
}

/// Perturbed one-hot vector of length `3^d`, stored as a packed bit set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedVector {
    words: Vec<u64>,
    len: usize,
    d: usize,
}

impl EncodedVector {
    fn zeros(d: usize, len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
            d,
        }
    }

    /// One-hot vector with bit `index` set.
    pub fn one_hot(d: usize, index: usize) -> Result<Self> {
        let len = index_space(d, DEFAULT_CAPACITY)?;
        if index >= len {
            return Err(domain(format!("index {index} outside [0, {len})")));
        }
        let mut v = Self::zeros(d, len);
        v.set(index, true);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn domain_size(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set positions, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    wi * 64 + b
                })
            })
        })
    }
}

/// Encodes a full record: one-hot at its index, then every bit kept with
/// probability `e^(ε/2) / (e^(ε/2) + 1)`.
///
/// Discretization and perturbation use separate sub-streams of `source`.
pub fn ioh_encode(
    record: &KeyValueRecord,
    epsilon: f64,
    source: &RandomSource,
) -> Result<EncodedVector> {
    check_epsilon(epsilon)?;
    let d = record.domain_size();
    let len = index_space(d, DEFAULT_CAPACITY)?;
    let hot = ioh_index(record, &mut source.derive(DISCRETIZE_STREAM).rng())?;
    let mut rng = source.derive(PERTURB_STREAM).rng();

    let keep = keep_probability(epsilon / 2.0, 2);
    let flip = 1.0 - keep;
    let mut v = EncodedVector::zeros(d, len);
    // Each cold bit is set independently with probability `flip`; jump
    // between set bits with geometric gaps instead of drawing 3^d uniforms.
    let log_stay = (-flip).ln_1p();
    let mut pos = 0usize;
    loop {
        let u = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_stay).floor();
        if gap.is_nan() || gap >= (len - pos) as f64 {
            break;
        }
        pos += gap as usize;
        v.set(pos, true);
        pos += 1;
        if pos >= len {
            break;
        }
    }
    v.set(hot, bernoulli(&mut rng, keep));
    Ok(v)
}

/// Largest domain for which [`ioh_table`] is materialized.
pub const IOH_TABLE_MAX_D: usize = 2;

/// `Pr[output vector | index]`: rows by record index, columns by the output
/// bit vector read as an integer with position 0 in the lowest bit.
pub fn ioh_table(d: usize, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    check_epsilon(epsilon)?;
    if d > IOH_TABLE_MAX_D {
        return Err(Error::Capacity {
            d,
            cap: IOH_TABLE_MAX_D,
        });
    }
    let len = index_space(d, DEFAULT_CAPACITY)?;
    let keep = keep_probability(epsilon / 2.0, 2);
    Ok((0..len)
        .map(|hot| {
            (0..1usize << len)
                .map(|out| {
                    (0..len)
                        .map(|i| {
                            if (out >> i & 1 == 1) == (i == hot) {
                                keep
                            } else {
                                1.0 - keep
                            }
                        })
                        .product()
                })
                .collect()
        })
        .collect())
}

/// Streaming sum of encoded vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IohAggregator {
    counts: Vec<u64>,
    n: u64,
    d: usize,
}

impl IohAggregator {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            counts: vec![0; index_space(d, DEFAULT_CAPACITY)?],
            n: 0,
            d,
        })
    }

    pub fn add(&mut self, v: &EncodedVector) -> Result<()> {
        if v.len() != self.counts.len() {
            return Err(domain(format!(
                "vector of length {} does not match aggregate of length {}",
                v.len(),
                self.counts.len()
            )));
        }
        for i in v.ones() {
            self.counts[i] += 1;
        }
        self.n += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.counts.len() != self.counts.len() {
            return Err(domain("cannot merge aggregates of different lengths"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }

    pub fn raw_counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn users(&self) -> u64 {
        self.n
    }

    /// Per-position calibration `((e^(ε/2)+1)·Σ − N) / (e^(ε/2)−1)`.
    pub fn finish(&self, epsilon: f64) -> Result<AggregateVector> {
        check_epsilon(epsilon)?;
        if self.n == 0 {
            return Err(domain("cannot calibrate an empty aggregate"));
        }
        let e = (epsilon / 2.0).exp();
        let n = self.n as f64;
        let values = self
            .counts
            .iter()
            .map(|&c| ((e + 1.0) * c as f64 - n) / (e - 1.0))
            .collect();
        Ok(AggregateVector {
            values,
            n_users: self.n,
            d: self.d,
            epsilon,
        })
    }
}

/// Calibrated per-position counts. Entries are unbiased and may be negative.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateVector {
    pub values: Vec<f64>,
    pub n_users: u64,
    pub d: usize,
    pub epsilon: f64,
}

pub fn ioh_aggregate<'a>(
    vectors: impl IntoIterator<Item = &'a EncodedVector>,
    epsilon: f64,
) -> Result<AggregateVector> {
    let mut vectors = vectors.into_iter().peekable();
    let first = vectors
        .peek()
        .ok_or_else(|| domain("no encoded vectors to aggregate"))?;
    let mut agg = IohAggregator::new(first.domain_size())?;
    for v in vectors {
        agg.add(v)?;
    }
    agg.finish(epsilon)
}

const FILE_TAG: &str = "# kvldp-ioh-aggregate";

impl AggregateVector {
    /// Exact counts as an aggregate, for oracle comparisons.
    pub fn from_counts(d: usize, counts: &[f64], epsilon: f64) -> Result<Self> {
        if counts.len() != index_space(d, DEFAULT_CAPACITY)? {
            return Err(domain("count vector length is not 3^d"));
        }
        Ok(Self {
            values: counts.to_vec(),
            n_users: counts.iter().sum::<f64>().round() as u64,
            d,
            epsilon,
        })
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Writes a header line `# kvldp-ioh-aggregate d=.. epsilon=.. n=.. seed=..`
    /// followed by one value per line.
    pub fn write_to(&self, path: &Path, seed: u64) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(
            w,
            "{FILE_TAG} d={} epsilon={} n={} seed={seed}",
            self.d, self.epsilon, self.n_users
        )
        .map_err(io)?;
        for v in &self.values {
            writeln!(w, "{v}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a file written by [`AggregateVector::write_to`]; returns the seed
    /// alongside.
    pub fn read_from(path: &Path) -> Result<(Self, u64)> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let parse_err = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(File::open(path).map_err(io)?).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(io)?
            .ok_or_else(|| parse_err(1, "empty file".into()))?;
        let fields = header
            .strip_prefix(FILE_TAG)
            .ok_or_else(|| parse_err(1, "missing aggregate header".into()))?;
        let mut d = None;
        let mut epsilon = None;
        let mut n = None;
        let mut seed = None;
        for field in fields.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| parse_err(1, format!("bad header field '{field}'")))?;
            let bad = || parse_err(1, format!("bad value in '{field}'"));
            match k {
                "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
                "epsilon" => epsilon = Some(v.parse::<f64>().map_err(|_| bad())?),
                "n" => n = Some(v.parse::<u64>().map_err(|_| bad())?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(parse_err(1, format!("unknown header field '{k}'"))),
            }
        }
        let (Some(d), Some(epsilon), Some(n_users), Some(seed)) = (d, epsilon, n, seed) else {
            return Err(parse_err(1, "header needs d, epsilon, n and seed".into()));
        };
        let len = index_space(d, DEFAULT_CAPACITY)?;
        let mut values = Vec::with_capacity(len);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(io)?;
            let v = line
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err(i as u64 + 2, format!("bad value '{line}'")))?;
            values.push(v);
        }
        if values.len() != len {
            return Err(parse_err(
                1,
                format!("expected {len} values, found {}", values.len()),
            ));
        }
        Ok((
            Self {
                values,
                n_users,
                d,
                epsilon,
            },
            seed,
        ))
    }
}
