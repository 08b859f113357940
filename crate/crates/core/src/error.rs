use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partition: cannot split {cols} columns into {k} blocks")]
    InvalidPartition { cols: usize, k: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid sparse matrix: {0}")]
    InvalidMatrix(String),

    #[error("unsupported regime: s = {s} exceeds k = {k} (at most half of the workers may straggle)")]
    UnsupportedRegime { s: usize, k: usize },

    #[error("no feasible weight split for k_a = {k_a}, k_b = {k_b}, target = {target}")]
    InfeasibleSplit { k_a: usize, k_b: usize, target: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("wrong subset: {0}")]
    InvalidSubset(String),

    #[error("decoding failed: subset {subset:?} gives a singular system")]
    DecodeFailure { subset: Vec<usize> },

    #[error("{count} subsets exceed the exhaustive cap of {cap}; use sampled mode")]
    CapExceeded { count: u128, cap: u128 },

    #[error("invalid device profile: {0}")]
    InvalidProfile(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
