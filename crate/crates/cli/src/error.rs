use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ringpoints::Error),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Process exit status.
pub const EXIT_OK: i32 = 0;
/// Invalid input or a failed check.
pub const EXIT_FAILURE: i32 = 1;
/// A budget ran out before the value was proven exact.
pub const EXIT_INCOMPLETE: i32 = 2;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(ringpoints::Error::Timeout { .. }) => EXIT_INCOMPLETE,
            _ => EXIT_FAILURE,
        }
    }
}
