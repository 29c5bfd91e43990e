//! Experiment harness for `rfps-core`: configuration, seeded Monte Carlo
//! suites and result files.

pub mod analysis;
pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentId};
pub use experiments::{run, Check, Report};
