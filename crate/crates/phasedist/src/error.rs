use thiserror::Error;

/// Errors surfaced by the library. `NonConvergence` is the only variant that
/// indicates a numerical failure at runtime; everything else is a contract
/// violation detectable from the inputs.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// No usable probability mass (e.g. vacuum input under the discard policy).
    #[error("no usable data: {0}")]
    NoData(String),

    #[error("failed to converge: {0}")]
    NonConvergence(String),

    /// The certified truncation tail exceeds the requested tolerance.
    #[error("truncation tail {tail:.3e} exceeds tolerance {tolerance:.3e}")]
    TailTooLarge { tail: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
