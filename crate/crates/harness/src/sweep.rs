//! Mechanism × ε × repetition grids over one or more datasets.

use kvldp_core::datagen::{true_stats, Dataset, GroundTruth};
use rayon::prelude::*;

use crate::emit::{Cell, Table};
use crate::error::{config, Result};
use crate::estimator::Estimator;
use crate::run::{run_single, BoxStats, MetricRow, RunSpec};

/// Privacy budgets swept by default.
pub const DEFAULT_EPSILONS: [f64; 8] = [0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
pub const DEFAULT_REPS: u32 = 50;
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub estimators: Vec<Estimator>,
    pub epsilons: Vec<f64>,
    pub reps: u32,
    pub seed: u64,
    pub vbar: f64,
    pub delta: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(config("no mechanisms selected"));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
            return Err(config(
                "epsilons must be a non-empty list of positive numbers",
            ));
        }
        if self.reps == 0 {
            return Err(config("repetitions must be at least 1"));
        }
        if !(-1.0..=1.0).contains(&self.vbar) {
            return Err(config(format!(
                "default value {} outside [-1, 1]",
                self.vbar
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config(format!("delta {} outside (0, 1)", self.delta)));
        }
        Ok(())
    }
}

/// A dataset with its exact statistics and a label for output rows.
pub struct Population {
    pub label: String,
    pub dataset: Dataset,
    pub truth: GroundTruth,
}

impl Population {
    pub fn new(label: impl Into<String>, dataset: Dataset) -> Self {
        let truth = true_stats(&dataset);
        Self {
            label: label.into(),
            dataset,
            truth,
        }
    }
}

/// Aggregate of all repetitions of one (dataset, mechanism, ε) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub dataset: String,
    pub estimator: Estimator,
    pub epsilon: f64,
    pub completed: u32,
    pub failures: u32,
    pub first_error: Option<String>,
    pub frequency_ae: Option<BoxStats>,
    pub mean_ae: Option<BoxStats>,
    pub frequency_mse: Option<f64>,
    pub mean_mse: Option<f64>,
    pub undefined_means: usize,
    pub bound_checked: usize,
    pub bound_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<MetricRow>,
    pub cells: Vec<CellSummary>,
}

/// Runs every cell; a failing repetition is recorded in its cell and the
/// sweep continues.
pub fn run_sweep(populations: &[Population], cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut grid = Vec::new();
    for (p, _) in populations.iter().enumerate() {
        for &estimator in &cfg.estimators {
            for &epsilon in &cfg.epsilons {
                grid.push((p, estimator, epsilon));
            }
        }
    }
    let results: Vec<Vec<Result<MetricRow>>> = grid
        .par_iter()
        .map(|&(p, estimator, epsilon)| {
            let pop = &populations[p];
            (0..cfg.reps)
                .into_par_iter()
                .map(|repetition| {
                    let spec = RunSpec {
                        estimator,
                        epsilon,
                        repetition,
                        seed: cfg.seed,
                        vbar: cfg.vbar,
                        delta: cfg.delta,
                    };
                    run_single(&pop.dataset, &pop.label, &pop.truth, &spec).map(|(_, row)| row)
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (&(p, estimator, epsilon), reps) in grid.iter().zip(results) {
        let mut ok = Vec::new();
        let mut failures = 0;
        let mut first_error = None;
        for r in reps {
            match r {
                Ok(row) => ok.push(row),
                Err(e) => {
                    failures += 1;
                    first_error.get_or_insert_with(|| e.to_string());
                }
            }
        }
        cells.push(summarize(
            &populations[p].label,
            estimator,
            epsilon,
            &ok,
            failures,
            first_error,
        ));
        rows.extend(ok);
    }
    Ok(SweepResult { rows, cells })
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub(crate) fn summarize(
    dataset: &str,
    estimator: Estimator,
    epsilon: f64,
    rows: &[MetricRow],
    failures: u32,
    first_error: Option<String>,
) -> CellSummary {
    let collect = |f: fn(&MetricRow) -> Option<f64>| rows.iter().filter_map(f).collect::<Vec<_>>();
    CellSummary {
        dataset: dataset.to_owned(),
        estimator,
        epsilon,
        completed: rows.len() as u32,
        failures,
        first_error,
        frequency_ae: BoxStats::from_values(&collect(|r| r.frequency_ae)),
        mean_ae: BoxStats::from_values(&collect(|r| r.mean_ae)),
        frequency_mse: mean(&collect(|r| r.frequency_mse)),
        mean_mse: mean(&collect(|r| r.mean_mse)),
        undefined_means: rows.iter().map(|r| r.undefined_means).sum(),
        bound_checked: rows.iter().map(|r| r.bound_checked).sum(),
        bound_violations: rows.iter().map(|r| r.bound_violations).sum(),
    }
}

/// Outcome of an advisory check; failures are reported, not fatal.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn median(b: &Option<BoxStats>) -> Option<f64> {
    b.map(|b| b.median)
}

/// Median frequency AE at the largest ε is at most that at the smallest,
/// per (dataset, mechanism).
pub fn check_monotonicity(cells: &[CellSummary]) -> Vec<SoftCheck> {
    let mut out = Vec::new();
    let mut keys: Vec<(&str, Estimator)> = cells
        .iter()
        .map(|c| (c.dataset.as_str(), c.estimator))
        .collect();
    keys.dedup();
    for (ds, est) in keys {
        let group: Vec<&CellSummary> = cells
            .iter()
            .filter(|c| c.dataset == ds && c.estimator == est)
            .collect();
        let lo = group.iter().min_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        let hi = group.iter().max_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if let (Some(a), Some(b)) = (median(&lo.frequency_ae), median(&hi.frequency_ae)) {
                out.push(SoftCheck {
                    name: format!("monotone frequency AE {ds}/{est}"),
                    passed: b <= a,
                    detail: format!(
                        "median AE {b:.4} at eps={} vs {a:.4} at eps={}",
                        hi.epsilon, lo.epsilon
                    ),
                });
            }
        }
    }
    out
}

/// Median mean AE is at least median frequency AE for every cell with
/// `ε ≤ 2`.
pub fn check_mean_above_frequency(cells: &[CellSummary]) -> Vec<SoftCheck> {
    cells
        .iter()
        .filter(|c| c.epsilon <= 2.0)
        .filter_map(|c| {
            let (f, m) = (median(&c.frequency_ae)?, median(&c.mean_ae)?);
            Some(SoftCheck {
                name: format!(
                    "mean AE >= frequency AE {}/{}/eps={}",
                    c.dataset, c.estimator, c.epsilon
                ),
                passed: m >= f,
                detail: format!("median mean AE {m:.4}, median frequency AE {f:.4}"),
            })
        })
        .collect()
}

const SUMMARY_COLUMNS: [&str; 25] = [
    "dataset",
    "mechanism",
    "epsilon",
    "completed",
    "failures",
    "freq_ae_min",
    "freq_ae_q1",
    "freq_ae_median",
    "freq_ae_q3",
    "freq_ae_max",
    "freq_ae_mean",
    "freq_mse_mean",
    "mean_ae_min",
    "mean_ae_q1",
    "mean_ae_median",
    "mean_ae_q3",
    "mean_ae_max",
    "mean_ae_mean",
    "mean_mse_mean",
    "undefined_means",
    "bound_checked",
    "bound_violations",
    "bound_violation_rate",
    "vbar",
    "error",
];

fn box_cells(b: &Option<BoxStats>) -> Vec<Cell> {
    match b {
        Some(b) => [b.min, b.q1, b.median, b.q3, b.max, b.mean]
            .map(Cell::from)
            .to_vec(),
        None => vec![Cell::Empty; 6],
    }
}

/// One row per cell with box-plot statistics of the per-repetition AEs.
pub fn summary_table(cells: &[CellSummary], vbar: f64) -> Table {
    let mut t = Table::new(&SUMMARY_COLUMNS);
    for c in cells {
        let mut row: Vec<Cell> = vec![
            c.dataset.as_str().into(),
            c.estimator.name().into(),
            c.epsilon.into(),
            c.completed.into(),
            c.failures.into(),
        ];
        row.extend(box_cells(&c.frequency_ae));
        row.push(c.frequency_mse.into());
        row.extend(box_cells(&c.mean_ae));
        row.push(c.mean_mse.into());
        row.push(c.undefined_means.into());
        row.push(c.bound_checked.into());
        row.push(c.bound_violations.into());
        row.push(if c.bound_checked > 0 {
            (c.bound_violations as f64 / c.bound_checked as f64).into()
        } else {
            Cell::Empty
        });
        row.push(if c.estimator == Estimator::F2m {
            vbar.into()
        } else {
            Cell::Empty
        });
        row.push(c.first_error.clone().map_or(Cell::Empty, Cell::from));
        t.push(row);
    }
    t
}

/// One row per (cell, repetition).
pub fn rows_table(rows: &[MetricRow]) -> Table {
    let mut t = Table::new(&[
        "dataset",
        "mechanism",
        "epsilon",
        "repetition",
        "vbar",
        "freq_ae",
        "freq_mse",
        "mean_ae",
        "mean_mse",
        "undefined_means",
        "bound_checked",
        "bound_violations",
    ]);
    for r in rows {
        t.push(vec![
            r.dataset.as_str().into(),
            r.estimator.name().into(),
            r.epsilon.into(),
            r.repetition.into(),
            r.vbar.into(),
            r.frequency_ae.into(),
            r.frequency_mse.into(),
            r.mean_ae.into(),
            r.mean_mse.into(),
            r.undefined_means.into(),
            r.bound_checked.into(),
            r.bound_violations.into(),
        ]);
    }
    t
}

/// Long-format per-key errors.
pub fn key_table(rows: &[MetricRow]) -> Table {
    let mut t = Table::new(&[
        "dataset",
        "mechanism",
        "epsilon",
        "repetition",
        "key",
        "freq_ae",
        "mean_ae",
    ]);
    for r in rows {
        for (k, (f, m)) in r.key_frequency_ae.iter().zip(&r.key_mean_ae).enumerate() {
            t.push(vec![
                r.dataset.as_str().into(),
                r.estimator.name().into(),
                r.epsilon.into(),
                r.repetition.into(),
                (k + 1).into(),
                (*f).into(),
                (*m).into(),
            ]);
        }
    }
    t
}
