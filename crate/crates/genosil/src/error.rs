//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
///
/// [`Error::exit_code`] maps each variant onto the process exit codes used by
/// the command-line tool: 1 for validation problems (bad configuration, bad
/// input files, shape mismatches), 2 for runtime failures (diverged training,
/// infeasible generation).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gradient tape does not match this network")]
    TapeMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("cannot step a terminal environment state")]
    TerminalStep,

    #[error("agent is inside the obstacle contact radius; barrier undefined")]
    DegenerateGeometry,

    #[error("safety constraint unsatisfiable within action bounds")]
    InfeasibleConstraint,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scenario sampling exhausted {attempts} attempts; ranges leave no room for the clearance margins")]
    SamplingExhausted { attempts: usize },

    #[error("expert acceptance rate too low: {kept}/{probed} probe episodes kept; check the scenario ranges")]
    LowAcceptanceRate { kept: usize, probed: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("no trials to aggregate")]
    EmptyEvaluation,

    #[error("checkpoint was trained for the {checkpoint} environment, not {requested}")]
    EnvMismatch {
        checkpoint: &'static str,
        requested: &'static str,
    },

    #[error("unsupported schema version {found} (this build reads version {expected})")]
    SchemaVersion { expected: u32, found: u32 },

    #[error("training aborted at step {step}: {reason}")]
    TrainingAborted { step: u64, reason: String },

    #[error("checkpoint not found: {0}")]
    MissingCheckpoint(PathBuf),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an I/O error with the path or operation it came from.
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 = validation error, 2 = runtime failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite(_)
            | Error::SamplingExhausted { .. }
            | Error::LowAcceptanceRate { .. }
            | Error::TrainingAborted { .. }
            | Error::InfeasibleConstraint => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
