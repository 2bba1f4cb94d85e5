use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardError {
    #[error("schedule index must be at least 1, got {0}")]
    ScheduleIndex(usize),

    #[error("depth {depth} exceeds the {precision} precision cap of {cap}; rebuild with extended precision")]
    DepthCap {
        depth: usize,
        cap: usize,
        precision: &'static str,
    },

    #[error("bit string must be non-empty")]
    EmptyBits,

    #[error("invalid bit character {0:?}, expected '0' or '1'")]
    BitChar(char),

    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must lie in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("perturbation vector must be orthogonal to the last axis and non-zero")]
    BadDirection,

    #[error("bit string has length {got}, but the instance was built with depth {expected}")]
    SigmaMismatch { expected: usize, got: usize },

    #[error("malformed instance file: {0}")]
    Parse(String),

    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for HardError {
    fn from(e: std::io::Error) -> Self {
        HardError::Io(e.to_string())
    }
}

impl From<csv::Error> for HardError {
    fn from(e: csv::Error) -> Self {
        HardError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HardError {
    fn from(e: serde_json::Error) -> Self {
        HardError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HardError>;
