//! Error types shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at byte {offset}: {kind}")]
    Parse { offset: u64, kind: ParseErrorKind },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

#[derive(Debug, Error)]
pub enum ParseErrorKind {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated file while reading {0}")]
    Truncated(String),

    #[error("invalid reading kind byte {kind} in record {record}")]
    InvalidKind { kind: u8, record: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn truncated(offset: u64, what: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            kind: ParseErrorKind::Truncated(what.into()),
        }
    }
}
