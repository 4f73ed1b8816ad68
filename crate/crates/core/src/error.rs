use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the range the operation accepts.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A consistent set of inputs that cannot be realized, e.g. a cache fill
    /// with fewer eligible files than cache slots.
    #[error("configuration error: {0}")]
    Config(String),

    /// The multiplier search did not reach the requested tolerance.
    #[error(
        "multiplier search did not converge after {iterations} iterations: \
         bracket [{lower:e}, {upper:e}], |sum(q) - K| = {residual:e}"
    )]
    NoConvergence {
        lower: f64,
        upper: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of an iterative or quadrature routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Numerical(_))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
