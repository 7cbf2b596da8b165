use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite sample {value} at {coord:?}")]
    NonFinite { coord: Vec<f64>, value: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("stencil needs {needed} points along axis {axis}, grid has {have}")]
    Stencil { axis: usize, needed: usize, have: usize },
    #[error("empty region")]
    EmptyRegion,
    #[error("degenerate weight")]
    DegenerateWeight,
    #[error("multi-index difference undefined: {tau:?} is not >= {sigma:?}")]
    MultiIndexOrder { tau: Vec<u32>, sigma: Vec<u32> },
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("infeasible exponent system: {0}")]
    Infeasible(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
