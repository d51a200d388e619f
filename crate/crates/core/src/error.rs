use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical estimate could not be certified to the requested tolerance.
    #[error("accuracy error: {message} (estimate {estimate:.3e})")]
    Accuracy { message: String, estimate: f64 },

    /// Grid refinement did not settle; both grid values are kept for diagnosis.
    #[error("refinement did not converge: {message} (coarse {coarse:.12e}, fine {fine:.12e})")]
    Refinement {
        message: String,
        coarse: f64,
        fine: f64,
    },

    /// A sampled function was evaluated outside its data without decay hints.
    #[error("extrapolation error: {0}")]
    Extrapolation(String),

    /// The sampling is too coarse for the requested differential quantity.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn accuracy(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Accuracy {
            message: msg.into(),
            estimate,
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Parse(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
