use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hurst index must lie strictly in (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("circulant embedding failed: relative eigenvalue {relative:.3e} below -{tolerance:.0e}")]
    EmbeddingFailure { relative: f64, tolerance: f64 },

    #[error(
        "no band plan covers the circle: largest candidate gap {gap:.6} rad exceeds epsilon {epsilon:.6} (raise q_max)"
    )]
    InfeasiblePlan { gap: f64, epsilon: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("output path {0} already exists (pass --force to overwrite)")]
    OutputExists(PathBuf),

    #[error("lag ({0}, {1}) exceeds grid of size {2}")]
    LagOutOfRange(i64, i64, usize),

    #[error("estimator undefined: {0}")]
    EstimatorUndefined(&'static str),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 infeasible plan, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidHurst(_) | Error::OutputExists(_) => 2,
            Error::InfeasiblePlan { .. } => 3,
            Error::EmbeddingFailure { .. }
            | Error::LagOutOfRange(..)
            | Error::EstimatorUndefined(_) => 4,
            Error::Io(_) => 1,
        }
    }
}
