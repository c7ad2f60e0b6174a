use std::fmt;

/// Reasons a serialized structure can be rejected on load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadError {
    BadMagic,
    VersionMismatch { found: u16, expected: u16 },
    Truncated,
    ChecksumMismatch { stored: u32, computed: u32 },
    Corrupt(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::BadMagic => write!(f, "bad magic number"),
            LoadError::VersionMismatch { found, expected } => {
                write!(f, "format version {found} not supported (expected {expected})")
            }
            LoadError::Truncated => write!(f, "unexpected end of data"),
            LoadError::ChecksumMismatch { stored, computed } => write!(
                f,
                "checksum mismatch (stored {stored:#010x}, computed {computed:#010x})"
            ),
            LoadError::Corrupt(msg) => write!(f, "corrupt data: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A position, rank or identifier outside the valid range.
    OutOfRange { what: &'static str, index: usize, len: usize },
    /// Caller supplied unusable input (empty set, empty string, bad parameters).
    InvalidInput(String),
    /// Input violated a construction precondition (unsorted strings, bad phrase id).
    Construction(String),
    /// Invariant broken during a build; indicates a bug.
    Internal(String),
    Load(LoadError),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutOfRange { what, index, len } => {
                write!(f, "{what} {index} out of range (length {len})")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Construction(msg) => write!(f, "construction failed: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
            Error::Load(e) => write!(f, "load failed: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<LoadError> for Error {
    fn from(e: LoadError) -> Self {
        Error::Load(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(what: &'static str, index: usize, len: usize) -> Error {
    Error::OutOfRange { what, index, len }
}
