use carnot_core::CarnotError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("evaluation: {0}")]
    Eval(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Eval(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<CarnotError> for CliError {
    fn from(e: CarnotError) -> Self {
        match e {
            CarnotError::Syntax { .. }
            | CarnotError::UndeclaredIndex { .. }
            | CarnotError::DuplicateBracket { .. }
            | CarnotError::GradingViolation { .. }
            | CarnotError::StepTooLarge(_)
            | CarnotError::UnknownBuiltin(_)
            | CarnotError::InvalidParameter(_)
            | CarnotError::Expression(_)
            | CarnotError::UnsupportedFormat(_)
            | CarnotError::NotHeisenberg
            | CarnotError::NotExtendable(_)
            | CarnotError::Misaligned(_)
            | CarnotError::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Eval(e.to_string()),
        }
    }
}
