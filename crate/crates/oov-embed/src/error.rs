use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] io::Error),

    #[error(transparent)]
    Core(#[from] oov_embed_core::Error),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: {reason}")]
    HeaderMismatch { line: usize, reason: String },

    #[error("cannot encode token {0:?}: tokens must be non-empty and contain no whitespace")]
    Encoding(String),

    #[error("not a W2GM file (bad magic bytes)")]
    MagicMismatch,

    #[error("unsupported W2GM version {0}")]
    VersionUnsupported(u8),

    #[error("file ends before the declared payload")]
    TruncatedFile,

    #[error("{0} trailing bytes after the declared payload")]
    TrailingBytes(usize),

    #[error("dataset line {line}: {reason}")]
    Dataset { line: usize, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 1 for I/O failures, 2 for validation and
    /// configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::RawIo(_) => 1,
            _ => 2,
        }
    }
}
