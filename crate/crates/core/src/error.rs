use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for {what} (size {len})")]
    Index {
        what: String,
        index: usize,
        len: usize,
    },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("encoding error: {0}")]
    Encoding(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            msg: msg.into(),
        }
    }
}
