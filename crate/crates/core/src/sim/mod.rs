//! Monte Carlo harness: configuration files, reference cards, repeated
//! paths with aggregated diagnostics, and comparisons between runs.

pub mod config;
pub mod harness;
pub mod reference;
pub mod stats;
pub mod svg;

use crate::algorithm::AlgoError;
use crate::design::DesignError;
use crate::models::ModelError;
use crate::saturated::SaturatedError;
use std::path::PathBuf;
use thiserror::Error;

pub use config::{parse_run_file, Emit, SimConfig, CONFIG_SCHEMA_VERSION};
pub use harness::{
    compare, simulate, summarize_records, summary_csv, write_outputs, CheckpointSummary,
    ComparisonReport, SimOutcome, SimSummary, TerminalSample,
};
pub use reference::{reference_card, ReferenceCard, ReferenceOptions};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{aborted} of {paths} paths aborted (limit is 1%); first: {first}")]
    TooManyAborts {
        aborted: usize,
        paths: usize,
        first: String,
    },
    #[error("checkpoints differ in n: {a:?} vs {b:?}")]
    MisalignedCheckpoints { a: Vec<usize>, b: Vec<usize> },
    #[error("cannot compare: {0}")]
    Mismatch(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("could not start the worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Algorithm(#[from] AlgoError),
    #[error(transparent)]
    Saturated(#[from] SaturatedError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SimError {
    /// Whether the error comes from user input rather than the computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            SimError::Config { .. }
                | SimError::MisalignedCheckpoints { .. }
                | SimError::Mismatch(_)
        ) || matches!(self, SimError::Algorithm(AlgoError::Config { .. }))
    }
}
