use thiserror::Error;

/// Reasons a raw parameter tuple is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("{0} must be a positive integer")]
    NotPositive(&'static str),
    #[error("{0} does not fit in memory-addressable range")]
    TooLarge(&'static str),
    #[error("n = {0} is too large (maximum {max})", max = crate::types::MAX_ROUNDS)]
    TooManyRounds(u64),
    #[error("m = {m} exceeds the {leaves} leaves of a depth-{depth} tree")]
    TooManyAuthBits { m: u64, leaves: u64, depth: u64 },
    #[error("verifier nonce length l_a = {l_a} must equal m + n = {expected}")]
    NonceALength { l_a: u64, expected: u64 },
    #[error("prover nonce length l_b = {l_b} must be at least n = {n}")]
    NonceBTooShort { l_b: u64, n: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamError),
    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("round {round} out of range 1..={max}")]
    RoundOutOfRange { round: usize, max: usize },
    #[error("operation `{op}` not allowed in state {state}")]
    WrongState { op: &'static str, state: String },
    #[error("prover session budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("unknown prover session {0}")]
    UnknownSession(usize),
    #[error("tree depth {0} too large to materialize")]
    TreeTooLarge(usize),
    #[error("enumeration space of 2^{log2} configurations exceeds the limit 2^{limit}")]
    EnumerationTooLarge { log2: u32, limit: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid channel configuration: {0}")]
    Channel(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
}
