//! Experiment harness for joint beamforming and satellite selection: TOML
//! configuration, seeded Monte-Carlo runs over the compared schemes, CSV
//! reports, brute-force oracles and invariant suites.

pub mod config;
pub mod experiment;
pub mod export;
pub mod oracle;
pub mod report;
pub mod validate;

use std::path::{Path, PathBuf};

pub use config::{BeamformingKind, ExperimentConfig, Profile, SchemeId, SelectionKind};
pub use experiment::{run_experiment, ExperimentReport, SchemeRun};
pub use report::emit_reports;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] leo_ican_core::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}: {1}")]
    Csv(PathBuf, csv::Error),
    #[error("oracle: {0}")]
    Oracle(&'static str),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io(path.to_path_buf(), e)
    }
}
