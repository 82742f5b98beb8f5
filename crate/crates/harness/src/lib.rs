//! Experiment sweeps, result files, tables and the `projfgd` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod suite;

pub use config::{Algorithm, BaselineBudget, Cell, ExperimentConfig, MRule};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentOutput, RunRecord, TrialData, TrialResult};
