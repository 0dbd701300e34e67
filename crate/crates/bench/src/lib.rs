//! Experiment runner for the foops solver: TOML experiment specs, batch
//! execution, method comparison and merit-surface dumps.

pub mod compare;
pub mod config;
pub mod error;
pub mod runner;
pub mod surface;

pub use compare::{compare_methods, compare_reports, ComparisonTable};
pub use config::{ExperimentSpec, MethodSpec, Overrides, ProblemSpec};
pub use error::{BenchError, Result};
pub use runner::{run_experiment, ExperimentReport, RunRecord};
