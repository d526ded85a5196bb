use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::Dataset;
use crate::error::{domain, Error, Result};
use crate::record::KeyValueRecord;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IngestOptions {
    /// Number of most-rated items kept as the key domain.
    pub top_k: usize,
    /// Rating range mapped affinely onto `[−1, 1]`.
    pub rating_scale: (f64, f64),
    /// Read at most this many data rows.
    pub max_rows: Option<u64>,
    /// Keep at most this many users, in order of first appearance.
    pub max_users: Option<usize>,
}

impl IngestOptions {
    pub fn new(top_k: usize, rating_scale: (f64, f64)) -> Self {
        Self {
            top_k,
            rating_scale,
            max_rows: None,
            max_users: None,
        }
    }
}

struct Row {
    user: String,
    item: String,
    rating: f64,
}

/// Streams the data rows of a `user,item,rating[,…]` file, comma or tab
/// separated, skipping a header row if the first rating is not numeric.
fn for_each_row(
    path: &Path,
    opts: &IngestOptions,
    mut f: impl FnMut(Row) -> Result<()>,
) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut first = String::new();
    BufReader::new(File::open(path).map_err(io)?)
        .read_line(&mut first)
        .map_err(io)?;
    let delimiter = if first.contains('\t') { b'\t' } else { b',' };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(File::open(path).map_err(io)?);
    let (lo, hi) = opts.rating_scale;
    let mut rows = 0u64;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < 3 {
            return Err(err(format!(
                "expected user, item and rating columns, found {}",
                record.len()
            )));
        }
        let rating = match record[2].parse::<f64>() {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(err(format!("bad rating '{}'", &record[2]))),
        };
        if !(lo..=hi).contains(&rating) {
            return Err(err(format!("rating {rating} outside [{lo}, {hi}]")));
        }
        if opts.max_rows.is_some_and(|m| rows >= m) {
            break;
        }
        rows += 1;
        f(Row {
            user: record[0].to_owned(),
            item: record[1].to_owned(),
            rating,
        })?;
    }
    Ok(())
}

/// Ascending item order: numeric when both ids are integers.
fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Builds a dataset from a ratings file: the `top_k` most-rated items become
/// keys (ties by ascending id, key 1 the most rated), ratings map to
/// `2(r − min)/(max − min) − 1`, and users left without keys are dropped.
/// A repeated (user, item) rating keeps the last occurrence.
pub fn ingest_ratings(path: &Path, opts: &IngestOptions) -> Result<Dataset> {
    let (lo, hi) = opts.rating_scale;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(domain(format!(
            "rating scale ({lo}, {hi}) must be finite with min < max"
        )));
    }
    if opts.top_k == 0 {
        return Err(domain("top_k must be positive"));
    }

    let mut counts: HashMap<String, u64> = HashMap::new();
    for_each_row(path, opts, |row| {
        *counts.entry(row.item).or_default() += 1;
        Ok(())
    })?;
    if opts.top_k > counts.len() {
        return Err(domain(format!(
            "top_k = {} exceeds the {} distinct items",
            opts.top_k,
            counts.len()
        )));
    }
    let mut items: Vec<(String, u64)> = counts.into_iter().collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| compare_ids(&a.0, &b.0)));
    items.truncate(opts.top_k);
    let key_of: HashMap<&str, u32> = items
        .iter()
        .enumerate()
        .map(|(k, (id, _))| (id.as_str(), k as u32))
        .collect();

    let mut user_slot: HashMap<String, usize> = HashMap::new();
    let mut users: Vec<HashMap<u32, f64>> = Vec::new();
    for_each_row(path, opts, |row| {
        let Some(&k) = key_of.get(row.item.as_str()) else {
            return Ok(());
        };
        let slot = match user_slot.get(&row.user) {
            Some(&s) => s,
            None => {
                if opts.max_users.is_some_and(|m| users.len() >= m) {
                    return Ok(());
                }
                users.push(HashMap::new());
                user_slot.insert(row.user, users.len() - 1);
                users.len() - 1
            }
        };
        let value = (2.0 * (row.rating - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0);
        users[slot].insert(k, value);
        Ok(())
    })?;
    if users.is_empty() {
        return Err(domain(format!("no ratings in {}", path.display())));
    }

    let d = opts.top_k;
    let records = users
        .into_iter()
        .map(|m| KeyValueRecord::new(d, m))
        .collect::<Result<Vec<_>>>()?;
    let provenance = format!(
        "ratings file={} top_k={d} scale=[{lo},{hi}] max_rows={} max_users={}",
        path.file_name()
            .map_or_else(String::new, |f| f.to_string_lossy().into_owned()),
        opts.max_rows.map_or("all".into(), |m| m.to_string()),
        opts.max_users.map_or("all".into(), |m| m.to_string()),
    );
    Dataset::new(d, records, provenance)?
        .with_key_names(items.into_iter().map(|(id, _)| id).collect())
}
