use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("quadrature did not converge: {context} (estimated error {error:.3e}, value {value:.6e})")]
    Quadrature {
        context: String,
        value: f64,
        error: f64,
    },

    #[error("profile build did not reach tolerance {tol:.1e}: worst relative residual {worst:.3e} at r = {radius:.4e}")]
    Convergence { tol: f64, worst: f64, radius: f64 },

    #[error("tail truncation could not be certified at radius {radius:.4e} (tail estimate {tail:.3e}, integral {integral:.3e})")]
    Truncation {
        radius: f64,
        tail: f64,
        integral: f64,
    },

    #[error("malformed profile table: {0}")]
    Format(String),

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
