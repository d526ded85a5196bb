//! Experiment harness for key-value local differential privacy: repeated
//! encode/decode runs, error metrics, sweeps, conditional-query experiments
//! and deterministic CSV/JSON output.

pub mod cli;
pub mod conditional;
pub mod emit;
pub mod error;
pub mod estimator;
pub mod run;
pub mod study;
pub mod sweep;

pub use error::{HarnessError, Result};
pub use estimator::Estimator;
