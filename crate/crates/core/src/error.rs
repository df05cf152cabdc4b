use thiserror::Error;

pub type Result<T, E = SmrsError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmrsError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },
    #[error("spectrum is not conjugate-symmetric at bin {0}")]
    NotConjugateSymmetric(i64),
    #[error("real-signal mode requires an even number of bins per period, got {0}")]
    OddRealChannel(usize),
    #[error("no signal detected: the support mask retains no bins")]
    NoSignal,
    #[error("degenerate system: {0}")]
    Degenerate(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
