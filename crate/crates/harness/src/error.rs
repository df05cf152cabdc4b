use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(
        "could not place {bands} non-overlapping bands of {width} bins after {attempts} attempts"
    )]
    Placement {
        bands: usize,
        width: usize,
        attempts: usize,
    },
    #[error("malformed spectra file, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] smrs_core::SmrsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
