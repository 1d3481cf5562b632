use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] woldkit::Error),
}

impl CliError {
    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Accepted = 0,
    Io = 1,
    Rejected = 2,
    Parse = 3,
    Unresolved = 4,
    Cap = 5,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<&CliError> for Exit {
    fn from(e: &CliError) -> Self {
        match e {
            CliError::Parse { .. } | CliError::Usage(_) => Exit::Parse,
            CliError::Write { .. } => Exit::Io,
            CliError::Core(core) => match core {
                woldkit::Error::Input(_) => Exit::Parse,
                woldkit::Error::Rejected { .. } => Exit::Rejected,
                woldkit::Error::DimensionCap { .. } => Exit::Cap,
                _ => Exit::Unresolved,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
