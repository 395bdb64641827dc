use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate objective: all {0} coefficients are zero")]
    DegenerateObjective(usize),

    #[error("empty coefficient list")]
    EmptyObjective,

    #[error("invalid coefficient at position {index}: {value}")]
    InvalidCoefficient { index: usize, value: f64 },

    #[error("coefficients must be positive and non-decreasing (violated at position {0})")]
    UnsortedCoefficients(usize),

    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid mutation parameters: {0}")]
    InvalidMutation(String),

    #[error("invalid drift parameters: {0}")]
    InvalidParams(String),

    #[error("parameters unachievable: {0}")]
    Unachievable(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("problem size {n} exceeds the enumeration cap {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("weights out of f64 range for direct evaluation (max ln weight {0})")]
    WeightRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid bit string: {0}")]
    InvalidBitString(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
