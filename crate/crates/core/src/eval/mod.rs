//! Evaluation runs, parameter sweeps and report emission.

mod config;
mod evaluate;
mod report;
mod sweep;

pub use config::RunConfig;
pub use evaluate::{evaluate, evaluate_with, load_buckets, Bucket, EvalBackends};
pub use report::{pivot_table, MetricsReport, MetricsRow, PromptVerdict, QueryRecord, CSV_COLUMNS};
pub use sweep::{expand_grid, sweep, SweepCell, SweepConfig, SweepOutcome, SweepReport};

use thiserror::Error;

use crate::backends::BackendError;
use crate::datasets::DatasetError;
use crate::kb::KbError;
use crate::oracle::OracleError;
use crate::prover::ProverError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prover(#[from] ProverError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(String),
}

impl EvalError {
    /// True when the failure came from a planner or translator backend.
    pub fn is_backend(&self) -> bool {
        matches!(
            self,
            EvalError::Backend(_) | EvalError::Prover(ProverError::Backend(_))
        )
    }
}
