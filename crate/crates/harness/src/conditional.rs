//! Conditional-query experiments: full-record encoding against the exact
//! conditional oracle over several key-domain sizes.

use kvldp_core::conditional::{
    conditional_frequency, conditional_mean, ioh_encode, parse_key_name, AggregateVector,
    Condition, IohAggregator,
};
use kvldp_core::datagen::{
    gen_regime, true_conditional, Dataset, FrequencyRegime, MeanRegime, ValueLaw,
};
use kvldp_core::rng::mix;
use kvldp_core::RandomSource;
use rayon::prelude::*;

use crate::emit::{Cell, Table};
use crate::error::{config, Result};
use crate::run::BoxStats;

/// Target key and condition, in `k1` / `k2=1,k3=0` notation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub target: String,
    pub condition: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalConfig {
    pub dims: Vec<usize>,
    pub users: usize,
    pub epsilons: Vec<f64>,
    pub reps: u32,
    pub seed: u64,
    pub frequency: FrequencyRegime,
    pub mean: MeanRegime,
    /// Explicit queries; `None` runs every 2-way query `k_t | k_c = 0/1`.
    pub queries: Option<Vec<QuerySpec>>,
}

impl Default for ConditionalConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 4, 8],
            users: 100_000,
            epsilons: vec![1.0],
            reps: 20,
            seed: 0,
            frequency: FrequencyRegime::High,
            mean: MeanRegime::Low,
            queries: None,
        }
    }
}

/// All 2-way queries over `d` keys.
pub fn two_way_queries(d: usize) -> Vec<QuerySpec> {
    let mut out = Vec::new();
    for t in 1..=d {
        for c in (1..=d).filter(|&c| c != t) {
            for v in [1, 0] {
                out.push(QuerySpec {
                    target: format!("k{t}"),
                    condition: format!("k{c}={v}"),
                });
            }
        }
    }
    out
}

/// Encodes every user of `ds` and returns the calibrated aggregate.
pub fn ioh_pipeline(ds: &Dataset, epsilon: f64, source: RandomSource) -> Result<AggregateVector> {
    let empty = IohAggregator::new(ds.domain_size())?;
    let agg = ds
        .records()
        .par_iter()
        .enumerate()
        .try_fold(
            || empty.clone(),
            |mut agg, (u, record)| {
                agg.add(&ioh_encode(record, epsilon, &source.stream(u as u64))?)?;
                Ok::<_, kvldp_core::Error>(agg)
            },
        )
        .try_reduce(
            || empty.clone(),
            |mut a, b| {
                a.merge(&b)?;
                Ok(a)
            },
        )?;
    Ok(agg.finish(epsilon)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalRow {
    pub d: usize,
    pub epsilon: f64,
    pub repetition: u32,
    pub target: String,
    pub condition: String,
    pub estimated_frequency: Option<f64>,
    pub true_frequency: Option<f64>,
    pub estimated_mean: Option<f64>,
    pub true_mean: Option<f64>,
}

impl ConditionalRow {
    pub fn frequency_ae(&self) -> Option<f64> {
        Some((self.estimated_frequency? - self.true_frequency?).abs())
    }

    pub fn mean_ae(&self) -> Option<f64> {
        Some((self.estimated_mean? - self.true_mean?).abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalCell {
    pub d: usize,
    pub epsilon: f64,
    pub target: String,
    pub condition: String,
    pub frequency_ae: Option<BoxStats>,
    pub mean_ae: Option<BoxStats>,
    pub undefined_frequency: usize,
    pub undefined_mean: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalResult {
    pub rows: Vec<ConditionalRow>,
    pub cells: Vec<ConditionalCell>,
}

struct Resolved {
    spec: QuerySpec,
    target: usize,
    condition: Condition,
}

fn resolve(queries: &[QuerySpec], d: usize) -> Result<Vec<Resolved>> {
    queries
        .iter()
        .map(|q| {
            let target =
                parse_key_name(&q.target, d).map_err(|e| config(format!("query at d={d}: {e}")))?;
            let condition = Condition::parse(&q.condition, d)
                .map_err(|e| config(format!("query at d={d}: {e}")))?;
            if condition.alpha().get(target) {
                return Err(config(format!(
                    "target {} also appears in condition '{}'",
                    q.target, q.condition
                )));
            }
            Ok(Resolved {
                spec: q.clone(),
                target,
                condition,
            })
        })
        .collect()
}

pub fn run_conditional(cfg: &ConditionalConfig) -> Result<ConditionalResult> {
    if cfg.dims.is_empty() || cfg.reps == 0 || cfg.users == 0 {
        return Err(config("conditional runs need dims, users and repetitions"));
    }
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
        return Err(config(
            "epsilons must be a non-empty list of positive numbers",
        ));
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &d in &cfg.dims {
        let ds = gen_regime(
            cfg.frequency,
            cfg.mean,
            ValueLaw::default(),
            d,
            cfg.users,
            mix(cfg.seed, d as u64),
        )?;
        let specs = cfg.queries.clone().unwrap_or_else(|| two_way_queries(d));
        let queries = resolve(&specs, d)?;
        let truths = queries
            .iter()
            .map(|q| true_conditional(&ds, q.target, &q.condition))
            .collect::<kvldp_core::Result<Vec<_>>>()?;
        for &epsilon in &cfg.epsilons {
            let per_rep = (0..cfg.reps)
                .map(|rep| {
                    let source = RandomSource::new(cfg.seed, 0)
                        .derive(d as u64)
                        .derive(epsilon.to_bits())
                        .derive(u64::from(rep));
                    let agg = ioh_pipeline(&ds, epsilon, source)?;
                    queries
                        .iter()
                        .zip(&truths)
                        .map(|(q, truth)| {
                            Ok(ConditionalRow {
                                d,
                                epsilon,
                                repetition: rep,
                                target: q.spec.target.clone(),
                                condition: q.spec.condition.clone(),
                                estimated_frequency: conditional_frequency(
                                    &agg,
                                    q.target,
                                    &q.condition,
                                )?,
                                true_frequency: truth.frequency,
                                estimated_mean: conditional_mean(&agg, q.target, &q.condition)?,
                                true_mean: truth.mean,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            for (qi, q) in queries.iter().enumerate() {
                let rs: Vec<&ConditionalRow> = per_rep.iter().map(|r| &r[qi]).collect();
                let f: Vec<f64> = rs.iter().filter_map(|r| r.frequency_ae()).collect();
                let m: Vec<f64> = rs.iter().filter_map(|r| r.mean_ae()).collect();
                cells.push(ConditionalCell {
                    d,
                    epsilon,
                    target: q.spec.target.clone(),
                    condition: q.spec.condition.clone(),
                    frequency_ae: BoxStats::from_values(&f),
                    mean_ae: BoxStats::from_values(&m),
                    undefined_frequency: rs
                        .iter()
                        .filter(|r| r.estimated_frequency.is_none())
                        .count(),
                    undefined_mean: rs.iter().filter(|r| r.estimated_mean.is_none()).count(),
                });
            }
            rows.extend(per_rep.into_iter().flatten());
        }
    }
    Ok(ConditionalResult { rows, cells })
}

/// Median over cells of the per-cell median frequency AE, per `(d, ε)`.
pub fn median_frequency_ae_by_dim(cells: &[ConditionalCell], epsilon: f64) -> Vec<(usize, f64)> {
    let mut dims: Vec<usize> = cells.iter().map(|c| c.d).collect();
    dims.dedup();
    dims.into_iter()
        .filter_map(|d| {
            let medians: Vec<f64> = cells
                .iter()
                .filter(|c| c.d == d && c.epsilon == epsilon)
                .filter_map(|c| c.frequency_ae.map(|b| b.median))
                .collect();
            BoxStats::from_values(&medians).map(|b| (d, b.median))
        })
        .collect()
}

pub fn conditional_rows_table(rows: &[ConditionalRow]) -> Table {
    let mut t = Table::new(&[
        "d",
        "epsilon",
        "repetition",
        "target",
        "condition",
        "est_freq",
        "true_freq",
        "freq_ae",
        "est_mean",
        "true_mean",
        "mean_ae",
    ]);
    for r in rows {
        t.push(vec![
            r.d.into(),
            r.epsilon.into(),
            r.repetition.into(),
            r.target.as_str().into(),
            r.condition.as_str().into(),
            r.estimated_frequency.into(),
            r.true_frequency.into(),
            r.frequency_ae().into(),
            r.estimated_mean.into(),
            r.true_mean.into(),
            r.mean_ae().into(),
        ]);
    }
    t
}

pub fn conditional_summary_table(cells: &[ConditionalCell]) -> Table {
    let mut t = Table::new(&[
        "d",
        "epsilon",
        "target",
        "condition",
        "freq_ae_min",
        "freq_ae_q1",
        "freq_ae_median",
        "freq_ae_q3",
        "freq_ae_max",
        "mean_ae_min",
        "mean_ae_q1",
        "mean_ae_median",
        "mean_ae_q3",
        "mean_ae_max",
        "undefined_freq",
        "undefined_mean",
    ]);
    let five = |b: &Option<BoxStats>| -> Vec<Cell> {
        match b {
            Some(b) => [b.min, b.q1, b.median, b.q3, b.max]
                .map(Cell::from)
                .to_vec(),
            None => vec![Cell::Empty; 5],
        }
    };
    for c in cells {
        let mut row: Vec<Cell> = vec![
            c.d.into(),
            c.epsilon.into(),
            c.target.as_str().into(),
            c.condition.as_str().into(),
        ];
        row.extend(five(&c.frequency_ae));
        row.extend(five(&c.mean_ae));
        row.push(c.undefined_frequency.into());
        row.push(c.undefined_mean.into());
        t.push(row);
    }
    t
}
