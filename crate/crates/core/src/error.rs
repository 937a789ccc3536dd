use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarnotError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: basis index {index} is not declared (algebra has dimension {dim})")]
    UndeclaredIndex { line: usize, index: usize, dim: usize },

    #[error("line {line}: bracket [{i},{j}] declared twice")]
    DuplicateBracket { line: usize, i: usize, j: usize },

    #[error("line {line}: bracket [{i},{j}] has support outside layer {expected}")]
    GradingViolation {
        line: usize,
        i: usize,
        j: usize,
        expected: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("group arithmetic supports step <= 3, got step {0}")]
    StepTooLarge(usize),

    #[error("unknown builtin algebra '{0}'")]
    UnknownBuiltin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("horizontal block does not extend to a graded automorphism: {0}")]
    NotExtendable(String),

    #[error("map evaluation failed: {0}")]
    Evaluation(String),

    #[error("point outside the map domain: {0}")]
    OutsideDomain(String),

    #[error("operation requires a Heisenberg group")]
    NotHeisenberg,

    #[error("map factors are misaligned: {0}")]
    Misaligned(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("map expression: {0}")]
    Expression(String),

    #[error("unsupported format '{0}'")]
    UnsupportedFormat(String),
}

pub type Result<T, E = CarnotError> = std::result::Result<T, E>;
