use thiserror::Error;

/// Errors produced by the kernels, models, sketching methods and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {detail}")]
    DimensionMismatch { context: &'static str, detail: String },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("parameter {t} lies outside the domain [{lower}, {upper}]")]
    OutOfDomain { t: f64, lower: f64, upper: f64 },

    #[error("no snapshot stored for parameter {t}")]
    NotStored { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A hypothesis of a probabilistic bound is violated (e.g. too little oversampling).
    #[error("bound hypothesis violated: {0}")]
    Hypothesis(String),

    /// A numerical precondition does not hold (e.g. a sketch that is not of full rank).
    #[error("numerical precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(context: &'static str, detail: impl Into<String>) -> Error {
    Error::DimensionMismatch {
        context,
        detail: detail.into(),
    }
}
