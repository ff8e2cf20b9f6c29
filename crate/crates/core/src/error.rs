use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("invalid hex string {0:?}: {1}")]
    Hex(String, &'static str),

    #[error("invalid rational {0:?}")]
    Rational(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot build stage graph: {0}")]
    Graph(String),

    #[error("functional mismatch at block {block}, round {round}, byte {byte}: expected {expected:02x}, got {actual:02x}")]
    FunctionalMismatch {
        block: usize,
        round: usize,
        byte: usize,
        expected: u8,
        actual: u8,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
