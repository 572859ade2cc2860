use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty sample")]
    EmptySample,

    #[error("out of domain: {value} not in [{omega_min}, {omega_max}]")]
    OutOfDomain {
        value: f64,
        omega_min: f64,
        omega_max: f64,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),

    #[error("density undefined: measure is a point mass")]
    DensityUndefined,

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("grid mismatch")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("predictor not absolutely continuous (pair {pair})")]
    NotAbsolutelyContinuous { pair: usize },

    #[error("degenerate fitted response (pair {pair})")]
    DegenerateFittedResponse { pair: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}
