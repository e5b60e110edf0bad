use thiserror::Error;

/// Failures of a CLI run, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Truncation(String),
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
    #[error("no advantage: {0}")]
    NoAdvantage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) | Self::Numerical(_) => 1,
            Self::Config(_) | Self::Io(_) => 2,
            Self::Truncation(_) => 3,
            Self::NoAdvantage(_) => 4,
        }
    }
}

impl From<fockbench::Error> for CliError {
    fn from(e: fockbench::Error) -> Self {
        match e {
            fockbench::Error::Config(m) | fockbench::Error::Domain(m) => Self::Config(m),
            e @ fockbench::Error::Truncation { .. } => Self::Truncation(e.to_string()),
            fockbench::Error::Degenerate(m) => Self::Numerical(m),
        }
    }
}
