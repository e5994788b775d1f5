use std::path::PathBuf;

use cocycle_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    /// The run finished but a step failed its estimate check; outputs were
    /// written before this is reported.
    #[error("estimate violated during the run: {0}")]
    EstimateViolation(String),
}

impl LabError {
    /// Process exit status: 2 for precondition refusals (including bad
    /// input), 3 for estimate violations and internal failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(e) => match e {
                CoreError::EstimateViolation(_) | CoreError::Internal(_) => 3,
                _ => 2,
            },
            LabError::Config(_) | LabError::Json { .. } => 2,
            LabError::EstimateViolation(_) => 3,
            LabError::Io { .. } | LabError::Csv(_) => 1,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
