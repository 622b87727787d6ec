use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("temperature must be nonzero")]
    ZeroTemperature,

    #[error("non-finite coupling or temperature: J={j}, Jp={jp}, T={t}")]
    NonFiniteParameter { j: f64, jp: f64, t: f64 },

    #[error("transfer weight `{name}` out of floating-point range (log value {log_value})")]
    WeightRange { name: &'static str, log_value: f64 },

    #[error("invalid transfer weights: {0}")]
    InvalidWeights(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow while evaluating {equation}")]
    Overflow { equation: &'static str },

    #[error("tree depth {depth} outside supported range {min}..={max}")]
    DepthOutOfRange {
        depth: usize,
        min: usize,
        max: usize,
    },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("invalid grid specification: {0}")]
    InvalidGrid(String),
}
