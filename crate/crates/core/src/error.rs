use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// `(n, a)` does not satisfy hypothesis H; `prime` is the offending prime.
    #[error("hypothesis H fails for n = {n}, a = {a} at prime {prime}: {reason}")]
    HypothesisViolated {
        n: u32,
        a: i64,
        prime: u64,
        reason: String,
    },

    /// The requested computation has no supported branch (e.g. no linear key polynomial).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An input or intermediate value exceeds a configured bound.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A bounded search ran out of budget before finding what it looked for.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
