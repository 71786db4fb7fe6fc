use ingredient_cf::bundle::BundleError;
use ingredient_cf::corpus::CorpusError;
use ingredient_cf::evaluation::EvalError;
use thiserror::Error;

/// Command failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<BundleError> for CliError {
    fn from(err: BundleError) -> Self {
        match err {
            BundleError::Similarity(_) | BundleError::Embedding(_) => CliError::Runtime(err.to_string()),
            _ => CliError::Io(err.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(err: CorpusError) -> Self {
        match err {
            CorpusError::EmptyCorpus | CorpusError::Invalid(_) => CliError::Runtime(err.to_string()),
            _ => CliError::Io(err.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        match err {
            EvalError::InvalidConfig(_) | EvalError::InvalidFraction(_) => CliError::Usage(err.to_string()),
            _ => CliError::Runtime(err.to_string()),
        }
    }
}
