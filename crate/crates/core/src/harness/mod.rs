//! Experiment orchestration: configuration, suites, and report emission.

pub mod config;
pub mod manifest;
pub mod suites;

pub use config::RunConfig;
pub use manifest::{ReportRow, RowStatus, RunManifest};
