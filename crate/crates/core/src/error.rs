use thiserror::Error;

/// Errors raised by the analytical and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration violated one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An integral did not reach the requested tolerance within the panel cap.
    #[error(
        "quadrature did not converge after {panels} panels: estimate {estimate:e}, \
         achieved error {achieved:e}, requested {requested:e}"
    )]
    NonConvergence {
        estimate: f64,
        achieved: f64,
        requested: f64,
        panels: usize,
    },

    /// A wrapped error with context about where it happened.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    /// The binding response left the unit interval by more than the tolerance allows.
    #[error("binding response {value:e} outside [0, 1] at t = {t} s (tolerance {tol:e})")]
    ResponseOutOfRange { value: f64, t: f64, tol: f64 },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True if the root cause is a quadrature convergence failure.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::ResponseOutOfRange { .. } => true,
            Error::Context { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
