use thiserror::Error;

/// Errors produced by the polarq library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("field order {0} is not a prime power")]
    NotPrimePower(usize),

    #[error("field order {0} is outside the supported range 2..=256")]
    FieldOrderOutOfRange(usize),

    #[error("element {value} is not in GF({q})")]
    InvalidElement { value: usize, q: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("row {row} is not a probability distribution: {reason}")]
    InvalidDistribution { row: usize, reason: String },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("output budget {budget} is smaller than the input alphabet size {q}")]
    InvalidBudget { budget: usize, q: usize },

    #[error("kernel table is not a bijection: {0}")]
    NotBijective(String),

    #[error("kernel matrix is singular")]
    SingularMatrix,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("gamma must be a nonzero field element")]
    GammaZero,

    #[error("kernel has no field structure attached (q = {0} is not a prime power)")]
    NoField(usize),

    #[error("kernel is not linear")]
    NotLinear,

    #[error("suffix enumeration of size {size} exceeds the budget {budget}")]
    SuffixSpaceTooLarge { size: u128, budget: u64 },

    #[error("raw output alphabet of size {size} exceeds the budget {budget}")]
    AlphabetBudgetExceeded { size: u128, budget: u64 },

    #[error("{size} paths exceed the path budget {budget}")]
    PathBudgetExceeded { size: u128, budget: u64 },

    #[error("channel input size {channel} does not match kernel alphabet size {kernel}")]
    AlphabetMismatch { channel: usize, kernel: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("chain rule violated: sum of subchannel capacities {sum} differs from {expected}")]
    ChainRule { sum: f64, expected: f64 },

    #[error("information set construction requires an exhaustive report")]
    RequiresExhaustive,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("output label {0} is not an output of the channel")]
    LabelUnknown(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
