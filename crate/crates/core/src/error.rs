use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid input: wrong dimension, duplicate pivot, out-of-range parameter.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A residual pivot fell to or below the breakdown tolerance.
    #[error("breakdown at step {step}: pivot value {value:e} <= tolerance {tolerance:e}")]
    Breakdown { step: usize, value: f64, tolerance: f64 },

    /// Non-finite kernel values or a loss of positive semidefiniteness.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A grid or matrix exceeded its size cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Bad or incomplete experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for the numeric failure classes (breakdown or precision loss).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Breakdown { .. } | Error::Numeric(_))
    }
}
