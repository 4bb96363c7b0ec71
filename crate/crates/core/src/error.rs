use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integrator or quadrature produced a non-finite value.
    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    /// The contract cannot support the requested quantity (e.g. zero passivum).
    #[error("degenerate contract: {0}")]
    DegenerateContract(String),

    /// Two independent computations of the same quantity disagreed.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
