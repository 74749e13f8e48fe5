use std::path::PathBuf;

/// Error type shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A frequency query fell outside the sampled range of a profile.
    #[error("frequency {frequency_hz} Hz outside sampled range [{min_hz}, {max_hz}] Hz")]
    OutOfRange {
        frequency_hz: f64,
        min_hz: f64,
        max_hz: f64,
    },

    /// An absorption profile file failed to parse.
    #[error("parse error in {path:?} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Matrix dimensions did not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Finite and strictly positive; rejects NaN.
pub(crate) fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}
