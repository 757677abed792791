use thiserror::Error;

/// Failure modes surfaced by the library.
///
/// Bankruptcy during a simulation is an outcome, not an error; `BankruptAccount`
/// only fires when an operation requires a solvent account as a precondition.
#[derive(Debug, Error)]
pub enum SlsError {
    /// A constructor or entry point was handed values outside its admissible set.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The operation is undefined for these inputs (degenerate case with a
    /// documented alternative).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation requires account value > 0.
    #[error("bankrupt account: {0}")]
    BankruptAccount(String),

    /// A numerical self-check failed; results would be unreliable.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, SlsError>;
