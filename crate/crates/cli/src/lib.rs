//! Experiment runner for `chslab-core`.
//!
//! An experiment is a named entry in a fixed registry that turns a block of
//! integer parameters into a list of checks. Each check records a computed
//! value, what it is compared against, whether each number is exact or
//! sampled, and a verdict. Suites are fixed lists of experiment configs.

pub mod config;
pub mod experiments;
pub mod report;
pub mod runner;

pub use config::{Caps, ExperimentConfig, Format};
pub use report::{Check, Relation, Report, Run, Verdict};
pub use runner::{run, run_suite, SUITES};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o error: {0}")]
    Io(String),
}
