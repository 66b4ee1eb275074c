use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("slope must be positive and finite, got {0}")]
    InvalidSlope(f64),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector norm {norm} is not unit (tolerance {tol:e})")]
    NotUnit { norm: f64, tol: f64 },

    #[error("action norm {0} exceeds 1")]
    ActionOutsideBall(f64),

    #[error("reward must be 0 or 1, got {0}")]
    InvalidReward(u8),

    #[error("invalid prior weights: {0}")]
    InvalidWeights(String),

    #[error("epsilon must lie in (0, 2], got {0}")]
    InvalidEpsilon(f64),

    #[error("breakpoint search did not converge for beta = {beta} after {iterations} iterations")]
    BreakpointNoConvergence { beta: f64, iterations: usize },

    #[error(
        "epsilon-net did not reach coverage {epsilon} within {rounds} rounds \
         (worst validated distance {worst})"
    )]
    NetNoCoverage { epsilon: f64, rounds: usize, worst: f64 },

    #[error("epsilon-net exceeded the atom budget of {budget}")]
    NetBudgetExceeded { budget: usize },

    #[error("epsilon-net has {size} atoms, above the covering bound {bound}")]
    NetCardinality { size: usize, bound: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
