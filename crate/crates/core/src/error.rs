use thiserror::Error;

/// Errors raised by the grid, model and decomposition layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("time {t} is beyond the model validity horizon {limit}")]
    HorizonBreach { t: f64, limit: f64 },

    #[error("model needs {needed} driver component(s), ensemble has {available}")]
    DriverDimension { needed: usize, available: usize },

    #[error("marked decomposition requested for a model without marks")]
    UnmarkedModel,

    #[error("{0} is not available for this model")]
    Unsupported(&'static str),

    #[error("subset enumeration over {0} times exceeds the supported maximum of 10")]
    TooManyTimes(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
