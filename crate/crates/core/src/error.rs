use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected} sites, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite amplitude at site {site} (t = {time})")]
    NonFinite { time: f64, site: i64 },

    #[error("stability guard violated: dt * |L| = {product:.4} exceeds {limit}")]
    StabilityGuard { product: f64, limit: f64 },

    #[error("series tolerance {tol:e} unreachable within {max_terms} terms")]
    ToleranceUnreachable { tol: f64, max_terms: usize },

    #[error("quadrature did not converge: last change {change:e} with {panels} panels")]
    QuadratureNotConverged { change: f64, panels: usize },

    #[error("denominator {value:e} below guard at site {site}")]
    DivisionGuard { site: i64, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects anything that is not a finite, strictly positive number.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
