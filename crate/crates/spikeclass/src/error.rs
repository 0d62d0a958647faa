use std::io;
use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{origin}:{line}: {field}: {message}")]
    Parse {
        origin: String,
        line: usize,
        field: String,
        message: String,
    },
    #[error(
        "{origin}: unsupported {kind} format version {found} (this build reads version {expected})"
    )]
    Version {
        origin: String,
        kind: &'static str,
        found: String,
        expected: u32,
    },
    #[error("{origin}: {message}")]
    Data { origin: String, message: String },
    #[error(transparent)]
    Model(#[from] spikeclass_core::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn data(origin: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data {
            origin: origin.into(),
            message: message.into(),
        }
    }
}
