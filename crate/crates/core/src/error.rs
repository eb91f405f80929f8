use thiserror::Error;

/// Errors raised by measure handling, classification, simulation and the
/// metric measure space functionals.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse measure spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("invalid measure: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrand is not integrable: {0}")]
    NonIntegrable(String),

    #[error(
        "quadrature did not converge after {intervals} intervals \
         (estimate {estimate:e}, error {error:e})"
    )]
    QuadratureNonConvergence {
        intervals: usize,
        estimate: f64,
        error: f64,
    },

    #[error("the measure has zero total merger rate")]
    ZeroMeasure,

    #[error("distances beyond the horizon {horizon} are censored; {context}")]
    Censored { horizon: f64, context: String },
}

impl Error {
    /// True for failures of numerical procedures, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonIntegrable(_) | Error::QuadratureNonConvergence { .. } | Error::ZeroMeasure
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
