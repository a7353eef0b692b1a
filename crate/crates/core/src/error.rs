use thiserror::Error;

/// Errors raised by the reduction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("dimension {dim} exceeds the tessellation cap of {cap}; pre-reduce the data first")]
    DimensionTooHigh { dim: usize, cap: usize },

    #[error("need at least {required} points, got {n}")]
    TooFewPoints { n: usize, required: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("candidate edge set does not connect all {0} points")]
    Disconnected(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unknown dataset family `{0}`")]
    UnknownFamily(String),

    #[error("algorithm `{0}` failed: {1}")]
    Algorithm(String, String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-parsable category used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Io(_) | Error::Json(_) => "input",
            Error::InvalidParameter(_) | Error::UnknownFamily(_) | Error::Shape(_) => "usage",
            Error::Degenerate(_) => "degenerate",
            _ => "numerical",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
