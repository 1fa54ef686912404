use thiserror::Error;

/// Errors raised across the library. Each variant maps onto one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 validation, 3 out-of-regime, 4 resource cap, 5 I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Domain(_) | Error::Parse { .. } => 2,
            Error::OutOfRegime(_) => 3,
            Error::ResourceCap(_) => 4,
            Error::Io(_) | Error::Json(_) => 5,
            Error::Numeric(_) => 1,
        }
    }
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
