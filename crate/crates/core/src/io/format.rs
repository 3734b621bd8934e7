use thiserror::Error;

/// Malformed or inconsistent file contents.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported format version {found} (expected {expected})")]
    UnsupportedVersion { expected: u16, found: u16 },

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("{extra} unexpected trailing bytes")]
    TrailingBytes { extra: u64 },

    #[error("grid {ny}x{nx} does not match {n_space} spatial points")]
    GridMismatch { n_space: usize, ny: usize, nx: usize },

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("{file} line {line}: {message}")]
    Record { file: String, line: usize, message: String },
}
