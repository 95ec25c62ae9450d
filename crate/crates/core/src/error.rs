use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("negative density {value} at cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("point {0} is not in the space")]
    UnknownPoint(usize),

    #[error("no informative radius: every ball in the sweep had zero measure")]
    NoInformativeRadius,

    #[error("insufficient radii: {0}")]
    InsufficientRadii(String),

    #[error("at-infinity indices undefined for a bounded space")]
    BoundedSpace,

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at point {point}")]
    NonFinite { point: usize, value: f64 },

    #[error("norm solver failed to bracket: {0}")]
    Bracket(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("weight is singular at node {node} (point {point})")]
    SingularWeight { node: usize, point: usize },

    #[error("invalid operator parameter: {0}")]
    InvalidOperator(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("experiment error: {0}")]
    Experiment(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
