//! F2M error as a function of the default value carried by absent keys.

use rayon::prelude::*;

use crate::emit::Table;
use crate::error::{config, Result};
use crate::estimator::Estimator;
use crate::run::{run_single, MetricRow, RunSpec};
use crate::sweep::{Population, DEFAULT_DELTA};

pub const DEFAULT_VBARS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
pub const DEFAULT_STUDY_EPSILONS: [f64; 2] = [0.5, 1.0];

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub vbars: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub reps: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyCell {
    pub epsilon: f64,
    pub vbar: f64,
    /// Mean over repetitions of the key-averaged mean AE.
    pub mean_ae: Option<f64>,
    pub frequency_ae: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub rows: Vec<MetricRow>,
    pub cells: Vec<StudyCell>,
}

impl StudyResult {
    /// Max / min of mean AE across default values, per ε.
    pub fn spread(&self) -> Vec<(f64, Option<f64>)> {
        let mut eps: Vec<f64> = self.cells.iter().map(|c| c.epsilon).collect();
        eps.dedup();
        eps.into_iter()
            .map(|e| {
                let v: Vec<f64> = self
                    .cells
                    .iter()
                    .filter(|c| c.epsilon == e)
                    .filter_map(|c| c.mean_ae)
                    .collect();
                let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                (e, (!v.is_empty() && min > 0.0).then(|| max / min))
            })
            .collect()
    }
}

/// Runs F2M over the `vbars × epsilons × reps` grid. Runs with the same ε and
/// repetition share their random streams across default values.
pub fn default_value_study(pop: &Population, cfg: &StudyConfig) -> Result<StudyResult> {
    if cfg.vbars.is_empty() || cfg.vbars.iter().any(|v| !(-1.0..=1.0).contains(v)) {
        return Err(config(
            "default values must be a non-empty list within [-1, 1]",
        ));
    }
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
        return Err(config(
            "epsilons must be a non-empty list of positive numbers",
        ));
    }
    if cfg.reps == 0 {
        return Err(config("repetitions must be at least 1"));
    }
    let mut grid = Vec::new();
    for &epsilon in &cfg.epsilons {
        for &vbar in &cfg.vbars {
            grid.push((epsilon, vbar));
        }
    }
    let per_cell: Vec<Vec<MetricRow>> = grid
        .par_iter()
        .map(|&(epsilon, vbar)| {
            (0..cfg.reps)
                .into_par_iter()
                .map(|repetition| {
                    let spec = RunSpec {
                        estimator: Estimator::F2m,
                        epsilon,
                        repetition,
                        seed: cfg.seed,
                        vbar,
                        delta: DEFAULT_DELTA,
                    };
                    run_single(&pop.dataset, &pop.label, &pop.truth, &spec).map(|(_, r)| r)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let avg = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let cells = grid
        .iter()
        .zip(&per_cell)
        .map(|(&(epsilon, vbar), rows)| StudyCell {
            epsilon,
            vbar,
            mean_ae: avg(rows.iter().filter_map(|r| r.mean_ae).collect()),
            frequency_ae: avg(rows.iter().filter_map(|r| r.frequency_ae).collect()),
        })
        .collect();
    Ok(StudyResult {
        rows: per_cell.into_iter().flatten().collect(),
        cells,
    })
}

pub fn study_table(result: &StudyResult) -> Table {
    let mut t = Table::new(&[
        "epsilon",
        "vbar",
        "mean_ae",
        "freq_ae",
        "mean_ae_max_over_min",
    ]);
    let spread = result.spread();
    for c in &result.cells {
        let ratio = spread
            .iter()
            .find(|(e, _)| *e == c.epsilon)
            .and_then(|(_, r)| *r);
        t.push(vec![
            c.epsilon.into(),
            c.vbar.into(),
            c.mean_ae.into(),
            c.frequency_ae.into(),
            ratio.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use kvldp_core::datagen::{gen_synthetic, SyntheticLaw, SyntheticParams};

    #[test]
    fn grid_and_validation() {
        let pop = Population::new(
            "u",
            gen_synthetic(
                SyntheticLaw::Uniform,
                5,
                2000,
                &SyntheticParams::default(),
                1,
            )
            .unwrap(),
        );
        let cfg = StudyConfig {
            vbars: vec![-1.0, 1.0],
            epsilons: vec![1.0],
            reps: 2,
            seed: 3,
        };
        let r = default_value_study(&pop, &cfg).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.cells.len(), 2);
        assert!(r.rows.iter().all(|row| row.estimator == Estimator::F2m));
        assert_eq!(r.spread().len(), 1);
        assert_eq!(study_table(&r).rows.len(), 2);
        let bad = StudyConfig {
            vbars: vec![1.5],
            ..cfg
        };
        assert!(default_value_study(&pop, &bad).is_err());
    }
}
