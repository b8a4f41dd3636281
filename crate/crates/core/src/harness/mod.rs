//! Experiment runner: strategy optimization per operating frequency, spectrum
//! sweeps, jamming-power BER sweeps and constellation dumps, with every
//! random draw derived from the master seed and the task identity.

mod experiment;
mod output;
mod scenario;

use thiserror::Error;

use crate::ofdm::OfdmError;
use crate::optimize::OptimizeError;
use crate::physics::PhysicsError;

pub use experiment::{
    link_channels, load_or_build_model, optimize_frequency, run_full_experiment, run_link_stage, run_link_task, LinkStageOutput,
    spectrum_rows, subcommand_optimize, subcommand_run_link, subcommand_sweep_spectrum, ExperimentOutput, LinkChannels,
};
pub use output::{
    ber_rows_from_csv, codebook_path, constellation_file_name, model_path, BerRow, ConstellationRow, Manifest,
    SpectrumRow, BER_FILE, CODEBOOK_FILE, MANIFEST_FILE, MODEL_FILE, SPECTRUM_FILE,
};
pub use scenario::{Scenario, SpectrumSettings, OUTPUT_DIR_ENV};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("link error: {0}")]
    Link(String),
    #[error("synchronization failed on all {frames} frames")]
    Sync { frames: usize },
    #[error("I/O error on {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("missing {artifact}; run `dmasim {subcommand}` first")]
    MissingArtifact { artifact: String, subcommand: &'static str },
}

impl HarnessError {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Link(_) => 1,
            HarnessError::Config(_) => 2,
            HarnessError::Model(_) => 3,
            HarnessError::Sync { .. } => 4,
            HarnessError::Io { .. } => 5,
            HarnessError::MissingArtifact { .. } => 6,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        HarnessError::Io { path: path.display().to_string(), detail: err.to_string() }
    }
}

impl From<PhysicsError> for HarnessError {
    fn from(e: PhysicsError) -> Self {
        HarnessError::Model(e.to_string())
    }
}

impl From<OptimizeError> for HarnessError {
    fn from(e: OptimizeError) -> Self {
        HarnessError::Model(e.to_string())
    }
}

impl From<OfdmError> for HarnessError {
    fn from(e: OfdmError) -> Self {
        HarnessError::Link(e.to_string())
    }
}
