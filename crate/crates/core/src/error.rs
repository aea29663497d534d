use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A linear optical network that cannot be embedded in a unitary.
    #[error("invalid optical network: {0}")]
    InvalidNetwork(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Derived quantities left the regime where the closed forms hold
    /// (e.g. a correlation coefficient with |C| >= 1).
    #[error("numerical validity: {0}")]
    Validity(String),

    #[error("no convergence: estimate {estimate:e} with error {error:e} ({detail})")]
    NonConvergence {
        estimate: f64,
        error: f64,
        detail: String,
    },

    #[error("unsupported state: {0}")]
    UnsupportedState(String),

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
