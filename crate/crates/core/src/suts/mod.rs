//! Systems under test: closed-form synthetic surrogates with dense-grid
//! ground truth, and a line-protocol adapter for external executables.

mod external;
mod ground_truth;
mod synthetic;

use std::time::Duration;

use thiserror::Error;

pub use external::{ExternalSut, ExternalSutConfig};
pub use ground_truth::{compute_ground_truth, GroundTruth, MAX_GROUND_TRUTH_CELLS};
pub use synthetic::{
    avp_surrogate, avp_surrogate_with, ball, benchmark_suite, by_name, shell, two_blobs, AvpGeometry, SyntheticKind,
    SyntheticSut, SUT_NAMES,
};

#[derive(Debug, Error)]
pub enum SutError {
    #[error("non-finite fitness value {0}")]
    NonFinite(f64),

    #[error("malformed response: {0}")]
    Malformed(String),

    #[error("no response within {0:?}")]
    Timeout(Duration),

    #[error("SUT process exited")]
    ProcessExited,

    #[error("failed to start SUT process: {0}")]
    Spawn(std::io::Error),

    #[error("SUT I/O error: {0}")]
    Io(#[from] std::io::Error),
}
