use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inconsistent shapes, labels, or parameters supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Probability mass sitting on the truncation boundary is too large for
    /// the result to be trusted.
    #[error(
        "truncation error: boundary mass {mass:.3e} at cutoff {cutoff} exceeds {limit:.1e}"
    )]
    Truncation { mass: f64, cutoff: usize, limit: f64 },

    /// Every measurement branch vanished.
    #[error("degenerate state: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
