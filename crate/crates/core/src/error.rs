use thiserror::Error;

/// Errors raised by estimation, inference and tuning routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough observations for the requested regression.
    #[error("sample too small: {rows} usable rows for {cols} regressors")]
    SampleTooSmall { rows: usize, cols: usize },

    /// A Gram, Toeplitz or design matrix is numerically singular.
    #[error("singular system: {context} (diagnostic {diagnostic:.3e})")]
    Singular { context: String, diagnostic: f64 },

    #[error("model unstable: {0}")]
    ModelUnstable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn singular(context: impl Into<String>, diagnostic: f64) -> Self {
        Error::Singular {
            context: context.into(),
            diagnostic,
        }
    }

    /// True for failures caused by the numbers rather than by the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::ModelUnstable(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
