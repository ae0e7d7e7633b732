use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] k3lat::Error),
    #[error("{case}: {source}")]
    Case {
        case: String,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub(crate) fn in_case(self, case: &str) -> Self {
        CliError::Case {
            case: case.into(),
            source: Box::new(self),
        }
    }

    /// Errors of every kind map to 2; 1 is reserved for a completed check
    /// with a negative answer.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
