use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("shape mismatch: expected {expected} bins, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("arithmetic overflow in prefix sum")]
    Overflow,

    #[error("cannot normalize a histogram with zero total")]
    ZeroTotal,

    #[error("map value {0} outside [0, 1]")]
    Range(f64),

    #[error("checksum mismatch: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Malformed PGM or tensor file input.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("not a binary PGM (expected magic P5)")]
    PgmMagic,

    #[error("unsupported PGM maxval {0} (only 255 is accepted)")]
    PgmMaxval(u64),

    #[error("malformed PGM header: {0}")]
    PgmHeader(&'static str),

    #[error("truncated PGM pixel data: expected {expected} bytes, found {actual}")]
    PgmTruncated { expected: usize, actual: usize },

    #[error("bad tensor file magic")]
    TensorMagic,

    #[error("unsupported tensor file version {0}")]
    TensorVersion(u16),

    #[error("tensor file length {actual} does not match header (expected {expected})")]
    TensorLength { expected: u64, actual: u64 },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::Shape { .. }
            | Error::Overflow
            | Error::ZeroTotal
            | Error::Range(_)
            | Error::Format(_) => 2,
            Error::Capacity(_) | Error::Bounds(_) => 3,
            Error::Io(_) => 4,
            Error::Mismatch(_) => 1,
        }
    }
}
