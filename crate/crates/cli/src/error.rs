use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Configuration, input or I/O problem.
    pub const CONFIG: i32 = 1;
    /// Command-line usage error (reported by the argument parser).
    pub const USAGE: i32 = 2;
    /// Reconstruction stopped at MaxIter without meeting the tolerance.
    pub const NOT_CONVERGED: i32 = 3;
    /// Solver breakdown: singular system, stagnation, non-finite values.
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] mre_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("reconstruction stopped after {0} iterations without reaching the tolerance")]
    NotConverged(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use mre_core::Error as E;
        match self {
            CliError::NotConverged(_) => exit::NOT_CONVERGED,
            CliError::Core(E::Singular(_) | E::Stagnation { .. } | E::NonFinite { .. } | E::EigenNotConverged { .. }) => {
                exit::NUMERICAL
            }
            _ => exit::CONFIG,
        }
    }
}
