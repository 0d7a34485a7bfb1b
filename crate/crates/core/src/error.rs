use thiserror::Error;

/// Errors raised anywhere in the simulation / reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("nonpositive storage modulus {value} Pa in element {element}")]
    NonPositiveModulus { element: usize, value: f64 },

    #[error("signal-to-noise ratio is undefined for an all-zero field")]
    ZeroSignal,

    #[error("singular system: {0}")]
    Singular(String),

    #[error("{context}: no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    Stagnation {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("power iteration did not converge in {iterations} iterations (last estimate {estimate:e})")]
    EigenNotConverged { iterations: usize, estimate: f64 },

    #[error("non-finite values encountered at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("ground truth is zero at voxel {0} inside the evaluation mask")]
    ZeroGroundTruth(usize),

    #[error("degenerate statistics: {0}")]
    Degenerate(String),

    #[error("malformed volume file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
