use crate::error::{domain, Result};

/// One user's sparse key-value set over the key domain `[0, d)`.
///
/// Pairs are kept sorted by key; each key appears at most once and every
/// value lies in `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyValueRecord {
    pairs: Vec<(u32, f64)>,
    d: usize,
}

impl KeyValueRecord {
    pub fn new(d: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        if d == 0 {
            return Err(domain("key domain must be non-empty"));
        }
        let mut pairs: Vec<(u32, f64)> = pairs.into_iter().collect();
        pairs.sort_by_key(|&(k, _)| k);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(domain(format!("key {} appears twice", w[0].0)));
            }
        }
        for &(k, v) in &pairs {
            if k as usize >= d {
                return Err(domain(format!("key {k} outside [0, {d})")));
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(domain(format!("value {v} of key {k} outside [-1, 1]")));
            }
        }
        Ok(Self { pairs, d })
    }

    /// Record holding no keys.
    pub fn empty(d: usize) -> Result<Self> {
        Self::new(d, [])
    }

    pub fn domain_size(&self) -> usize {
        self.d
    }

    pub fn get(&self, key: usize) -> Option<f64> {
        let key = u32::try_from(key).ok()?;
        self.pairs
            .binary_search_by_key(&key, |&(k, _)| k)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn contains(&self, key: usize) -> bool {
        self.get(key).is_some()
    }

    pub fn pairs(&self) -> &[(u32, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}
