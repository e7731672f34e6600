use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid problem definition: {0}")]
    InvalidProblem(String),

    #[error("degenerate-training-set: {0}")]
    DegenerateTrainingSet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ground-truth resolution of {cells} cells exceeds the cap of {cap}")]
    ResolutionTooLarge { cells: u128, cap: u128 },

    #[error("unsupported objective count {0} (expected 2 or 3)")]
    UnsupportedObjectiveCount(usize),

    #[error("malformed file {path}: {reason}")]
    Malformed { path: String, reason: String },

    #[error(transparent)]
    Sut(#[from] crate::suts::SutError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
