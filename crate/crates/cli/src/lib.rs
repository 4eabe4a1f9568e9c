//! Experiment harness: TOML configuration, deterministic Monte-Carlo drivers
//! that write one CSV per experiment, and a run manifest with checksums.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;

pub use config::{parse_config, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use experiments::{Harness, Stage};
pub use manifest::{execute, RunManifest};
