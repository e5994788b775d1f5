use alloc::string::String;

/// Failures shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("outside the principal branch of log: {0}")]
    Branch(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("precondition refused: {0}")]
    Refused(String),
    #[error("estimate violated: {0}")]
    EstimateViolation(String),
    #[error("resonance not unique: k = {first} and k = {second} both resonant within the window")]
    NonUniqueResonance { first: i64, second: i64 },
    #[error("bandwidth {requested} exceeds the grid limit {limit}")]
    Bandwidth { requested: usize, limit: usize },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
