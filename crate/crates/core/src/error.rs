use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("zero frequency")]
    ZeroFrequency,

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("operator not elliptic: {0}")]
    NotElliptic(String),

    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("invalid model parameter {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("unknown form id `{0}`")]
    UnknownForm(String),

    #[error("trivial kernel")]
    TrivialKernel,

    #[error("invalid tolerance {0}: must be positive")]
    InvalidTolerance(f64),

    #[error("discrete pairing deficient (dim ker B^T = {dim_ker_bt})")]
    PairingDeficient { dim_ker_bt: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
