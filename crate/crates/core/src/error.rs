use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of the operation (on the cut, t ≤ 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Argument violates a documented range restriction (series length, k ≤ 40, ...).
    #[error("range error: {0}")]
    Range(String),

    /// Result not representable in double precision.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A quadrature ran out of budget before reaching its tolerance.
    #[error("quadrature did not converge: {what} (value {value:e}, error estimate {error:e}, {evaluations} evaluations)")]
    NonConvergence {
        what: String,
        value: f64,
        error: f64,
        evaluations: usize,
    },

    /// A power series was asked for outside its disc of convergence.
    #[error("series diverges: {0}")]
    Divergent(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Overflow(_))
    }
}
