use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or series evaluation missed its tolerance.
    #[error("numeric failure in {context}: requested tolerance {requested:e}, achieved error estimate {achieved:e}")]
    NumericFailure {
        context: String,
        requested: f64,
        achieved: f64,
    },

    /// Likelihood evaluation failed at observation `t`.
    #[error("likelihood evaluation failed at t = {t}: {source}")]
    AtObservation {
        t: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("optimization failed: {message}")]
    Optimization {
        message: String,
        diagnostics: Vec<String>,
    },

    #[error("singular or rank-deficient matrix: {0}")]
    Singular(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Process exit code used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::Data(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::AtObservation { source, .. } => source.exit_code(),
            Error::Domain(_)
            | Error::NumericFailure { .. }
            | Error::Optimization { .. }
            | Error::Singular(_) => 3,
        }
    }

    /// Short machine-parsable category used as the error prefix on stderr.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "usage",
            Error::Data(_) | Error::Io(_) | Error::Json(_) => "data",
            Error::AtObservation { source, .. } => source.category(),
            _ => "numeric",
        }
    }
}
