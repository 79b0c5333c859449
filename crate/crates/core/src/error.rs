use std::path::PathBuf;

use crate::frozen_solver::SolveStats;

/// Errors produced by the solver stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (|a_ij - a_ji| = {gap:e})")]
    NonSymmetric { gap: f64 },

    #[error("coefficient matrix has eigenvalues [{min_eig}, {max_eig}] outside [{lambda}, {big_lambda}]")]
    EllipticityBounds {
        min_eig: f64,
        max_eig: f64,
        lambda: f64,
        big_lambda: f64,
    },

    #[error("operators have different ellipticity pairs: ({0}, {1}) vs ({2}, {3})")]
    EllipticityMismatch(f64, f64, f64, f64),

    #[error("coefficient matrix admits no nonnegative stencil decomposition: {0}")]
    Monotonicity(String),

    #[error("frozen solve did not converge after {} iterations (residual {:e})", .0.iterations, .0.final_residual)]
    NonConvergence(SolveStats),

    #[error("fixed-point iteration did not converge at eps = {eps:e} (last gap {last_gap:e})")]
    FixedPointNonConvergence {
        eps: f64,
        last_gap: f64,
        gaps: Vec<f64>,
    },

    #[error("cannot bracket the free-boundary point: {0}")]
    NoBracket(String),

    #[error("damped iteration produced distinct solutions (sup gap {gap:e})")]
    MultipleSolutions { gap: f64 },

    #[error("failed to parse {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
