use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty operator")]
    EmptyOperator,
    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entries array has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("hermitian required")]
    HermitianRequired,
    #[error("not PSD: smallest eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("observable required")]
    ObservableRequired,
    #[error("not a projector: {0}")]
    NotProjector(String),
    #[error("state must be positive semidefinite with unit trace: {0}")]
    InvalidState(String),
    #[error("degenerate configuration: |sigma - O|_1 = {0:e}")]
    DegenerateConfiguration(f64),
    #[error("need at least two pairs")]
    NeedTwoPairs,
    #[error("degenerate metric: source points {0} and {1} coincide")]
    DegenerateMetric(String, String),
    #[error("too large, use sampled (n = {0} > 12)")]
    TooLarge(usize),
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of file handling or decoding, as opposed to
    /// numerical precondition violations.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Malformed(_)
        )
    }

    /// True for bad caller-supplied parameters (usage errors).
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::TooLarge(_))
    }
}
