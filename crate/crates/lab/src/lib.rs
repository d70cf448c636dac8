//! Experiment runner for the `zne-core` simulation lab: configuration and
//! file formats, the t1/ghz/quench/tn-baseline/insertion-audit pipelines,
//! parameter sweeps and the `zne-lab` command line.

pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pipeline;
mod quench;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{LabError, LabResult};
pub use pipeline::{run, RunReport, SummaryRow};
