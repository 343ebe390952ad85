use thiserror::Error;

/// Errors produced anywhere in the tomography stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("invalid trace {0}")]
    InvalidTrace(f64),

    #[error("process is not trace preserving: {0}")]
    NotTracePreserving(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("record mode {record} does not match ensemble mode {ensemble}")]
    ModeMismatch { record: String, ensemble: String },

    #[error("ensemble degenerated: every particle has zero likelihood")]
    DegenerateEnsemble,

    #[error("input is not a wave plate (best squared Bures residual {residual:.4})")]
    NotAWaveplate { residual: f64 },

    #[error("run failed after {events} events: {source}")]
    RunFailed { events: u64, source: Box<Error> },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than a failure
    /// during computation. Used by the CLI to pick an exit code.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::NotHermitian(_)
                | Error::NotPsd(_)
                | Error::InvalidTrace(_)
                | Error::NotTracePreserving(_)
                | Error::InvalidParameter(_)
                | Error::Parse(_)
                | Error::ModeMismatch { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
