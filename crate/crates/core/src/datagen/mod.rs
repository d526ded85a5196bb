//! Datasets: synthetic generators, ratings ingestion, exact ground truth and
//! a plain-text persistence format.

mod ingest;
mod synthetic;
mod truth;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use ingest::{ingest_ratings, IngestOptions};
pub use synthetic::{
    clipped_normal_mean, gen_regime, gen_synthetic, FrequencyRegime, KeyTarget, MeanRegime,
    SyntheticLaw, SyntheticParams, ValueLaw,
};
pub use truth::{true_conditional, true_stats, ConditionalTruth, GroundTruth};

use crate::error::{domain, Error, Result};
use crate::record::KeyValueRecord;

/// A population of users over the key domain `[0, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    records: Vec<KeyValueRecord>,
    d: usize,
    provenance: String,
    key_names: Vec<String>,
    targets: Option<Vec<KeyTarget>>,
}

impl Dataset {
    pub fn new(
        d: usize,
        records: Vec<KeyValueRecord>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(domain("key domain must be non-empty"));
        }
        if records.is_empty() {
            return Err(domain("dataset needs at least one user"));
        }
        if let Some(r) = records.iter().find(|r| r.domain_size() != d) {
            return Err(domain(format!(
                "record over {} keys in a dataset over {d}",
                r.domain_size()
            )));
        }
        let provenance = provenance.into();
        if provenance.contains('\n') {
            return Err(domain("provenance must be a single line"));
        }
        Ok(Self {
            records,
            d,
            provenance,
            key_names: (1..=d).map(|i| format!("k{i}")).collect(),
            targets: None,
        })
    }

    /// Replaces the default `k1..kd` key names.
    pub fn with_key_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(domain(format!(
                "{} key names for {} keys",
                names.len(),
                self.d
            )));
        }
        if names
            .iter()
            .any(|n| n.is_empty() || n.contains([',', '\n']))
        {
            return Err(domain(
                "key names must be non-empty and free of commas and newlines",
            ));
        }
        self.key_names = names;
        Ok(self)
    }

    pub(crate) fn with_targets(mut self, targets: Vec<KeyTarget>) -> Self {
        debug_assert_eq!(targets.len(), self.d);
        self.targets = Some(targets);
        self
    }

    pub fn records(&self) -> &[KeyValueRecord] {
        &self.records
    }

    pub fn domain_size(&self) -> usize {
        self.d
    }

    pub fn users(&self) -> usize {
        self.records.len()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn key_names(&self) -> &[String] {
        &self.key_names
    }

    /// Per-key generator targets, for synthetic datasets.
    pub fn targets(&self) -> Option<&[KeyTarget]> {
        self.targets.as_deref()
    }

    /// Same users restricted to the first `d` keys.
    pub fn truncate_keys(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.d {
            return Err(domain(format!("cannot truncate {} keys to {d}", self.d)));
        }
        let records = self
            .records
            .iter()
            .map(|r| {
                KeyValueRecord::new(
                    d,
                    r.pairs().iter().copied().filter(|&(k, _)| (k as usize) < d),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::new(d, records, format!("{} keys=1..{d}", self.provenance))?
            .with_key_names(self.key_names[..d].to_vec())?;
        out.targets = self.targets.as_ref().map(|t| t[..d].to_vec());
        Ok(out)
    }

    /// Writes `# kvldp-dataset d=.. n=.. provenance=..`, a `# keys=` line,
    /// then one `user_index,key_index,value` row per pair.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(
            w,
            "{FILE_TAG} d={} n={} provenance={}",
            self.d,
            self.users(),
            self.provenance
        )
        .map_err(io)?;
        writeln!(w, "# keys={}", self.key_names.join(",")).map_err(io)?;
        for (u, r) in self.records.iter().enumerate() {
            for &(k, v) in r.pairs() {
                writeln!(w, "{u},{k},{v}").map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line as u64,
            message,
        };
        let mut lines = BufReader::new(File::open(path).map_err(io)?).lines();
        let mut next_line = |lineno: usize| -> Result<String> {
            lines
                .next()
                .transpose()
                .map_err(io)?
                .ok_or_else(|| err(lineno, "unexpected end of file".into()))
        };

        let header = next_line(1)?;
        let rest = header
            .strip_prefix(FILE_TAG)
            .ok_or_else(|| err(1, "missing dataset header".into()))?;
        let (fields, provenance) = rest
            .split_once(" provenance=")
            .ok_or_else(|| err(1, "header lacks provenance".into()))?;
        let mut d = None;
        let mut n = None;
        for field in fields.split_whitespace() {
            match field.split_once('=') {
                Some(("d", v)) => d = v.parse::<usize>().ok(),
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                _ => return Err(err(1, format!("bad header field '{field}'"))),
            }
        }
        let (Some(d), Some(n)) = (d, n) else {
            return Err(err(1, "header needs numeric d and n".into()));
        };
        let keys = next_line(2)?;
        let names: Vec<String> = keys
            .strip_prefix("# keys=")
            .ok_or_else(|| err(2, "missing key-name line".into()))?
            .split(',')
            .map(str::to_owned)
            .collect();

        let mut pairs: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, line) in lines.enumerate() {
            let lineno = i + 3;
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let (Some(u), Some(k), Some(v), None) = (it.next(), it.next(), it.next(), it.next())
            else {
                return Err(err(
                    lineno,
                    format!("expected 'user_index,key_index,value', got '{line}'"),
                ));
            };
            let u: usize = u
                .parse()
                .map_err(|_| err(lineno, format!("bad user index '{u}'")))?;
            let k: u32 = k
                .parse()
                .map_err(|_| err(lineno, format!("bad key index '{k}'")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| err(lineno, format!("bad value '{v}'")))?;
            let slot = pairs
                .get_mut(u)
                .ok_or_else(|| err(lineno, format!("user index {u} outside [0, {n})")))?;
            slot.push((k, v));
        }
        let records = pairs
            .into_iter()
            .enumerate()
            .map(|(u, p)| {
                KeyValueRecord::new(d, p).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("user {u}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, records, provenance)?.with_key_names(names)
    }
}

const FILE_TAG: &str = "# kvldp-dataset";
