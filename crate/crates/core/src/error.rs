use thiserror::Error;

/// Errors raised anywhere in the approximation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operation was applied outside its mathematical domain
    /// (division by an interval containing zero, `log` of a non-positive box, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative numerical procedure did not converge or blew up.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Function handles only carry the value and its first two derivatives.
    #[error("derivative of order {0} is not available")]
    DerivativeOrder(u8),

    /// The exchange system is singular or too ill-conditioned at the working
    /// precision. `pivot` is the elimination step that failed.
    #[error("singular or ill-conditioned exchange system (pivot {pivot})")]
    SingularSystem { pivot: usize },

    #[error("exchange failed: {0}")]
    ExchangeFailed(String),

    #[error("degree cap {0} exceeded")]
    DegreeCapExceeded(usize),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("format overflow: {0}")]
    FormatOverflow(String),

    #[error("rounded coefficients reintroduce a cancellation at x^{0}")]
    CancellationReintroduced(u32),

    #[error("plugin error: {0}")]
    Plugin(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
