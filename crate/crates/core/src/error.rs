use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps variants to its exit-code contract: configuration and
/// parameter problems exit with 2, numeric failures (instability,
/// divergence, singularity, non-convergence) exit with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("unstable plant: {0}")]
    Stability(String),

    #[error("state diverged at step {step}: {detail}")]
    Divergence { step: usize, detail: String },

    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    /// Exit code for the CLI contract: 0 success, 2 config error, 3 numeric error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
