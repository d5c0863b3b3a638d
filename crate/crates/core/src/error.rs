use thiserror::Error;

/// Errors raised anywhere in the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("post-selection did not succeed within {0} attempts")]
    RetryCapExceeded(u64),

    #[error("circuit shape mismatch: {0}")]
    Shape(String),

    #[error("no selector for measurement outcome {0}")]
    MissingSelector(String),

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed garbled circuit: {0}")]
    MalformedGarbling(String),

    #[error("unknown circuit id: {0}")]
    UnknownCircuit(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("network deadlock at tick {0}")]
    Deadlock(u32),

    #[error("pre-sent registers exhausted after {0} runs")]
    RegistersExhausted(usize),

    #[error("instance too large for exact replay: {0}")]
    InstanceTooLarge(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("view schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
