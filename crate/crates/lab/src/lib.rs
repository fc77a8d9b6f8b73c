//! Experiment runner for `weyl-core`: TOML configs, result files, run
//! manifests and the `weyl-lab` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::LabError;
pub use runner::{run, RunManifest, RunOptions, RunStatus};
