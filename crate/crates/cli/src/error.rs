use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] distrisk::Error),
}

impl CliError {
    /// 2 config, 3 arbitrage, 4 numeric failure.
    pub fn exit_code(&self) -> u8 {
        use distrisk::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::ArbitrageViolation(_) => 3,
                E::BracketNotFound { .. }
                | E::DegeneratePolytope(_)
                | E::InvalidTriangulation(_)
                | E::CalibrationDegenerate(_)
                | E::ProbabilityOutOfRange(_)
                | E::EmptyBatch => 4,
                _ => 2,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
