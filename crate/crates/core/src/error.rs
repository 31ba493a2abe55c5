use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension m = {0}")]
    InvalidDimension(u32),
    #[error("index {index} out of range for dimension {m}")]
    IndexOutOfRange { index: usize, m: u32 },
    #[error("invalid code parameters RM({m},{r})")]
    InvalidCode { m: u32, r: u32 },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("vector is not a codeword of the code")]
    NotACodeword,
    #[error("frame of {0} bits is shorter than the CRC width")]
    FrameTooShort(usize),
    #[error("invalid channel parameter: {0}")]
    InvalidChannel(String),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("operation requires order {expected}, code has order {actual}")]
    WrongOrder { expected: u32, actual: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("aggregation needs at least one vote")]
    EmptyVotes,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
