//! Error type shared by every module, with the CLI exit-code mapping.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EcsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("resonance at m = {m:?} (|E0(m) - E0(n)| = {gap:e}); try --method degenerate")]
    Resonance { m: Vec<i64>, gap: f64 },

    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("basis size {size} exceeds maximum {max}")]
    BasisTooLarge { size: usize, max: usize },

    #[error("ambiguous selection between {first} and {second}")]
    Ambiguous { first: f64, second: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl EcsError {
    /// 0 ok, 2 resonance, 3 no convergence, 4 config, 5 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            EcsError::Resonance { .. } => 2,
            EcsError::NoConvergence { .. } | EcsError::Ambiguous { .. } => 3,
            EcsError::Config(_) | EcsError::Precondition(_) | EcsError::BasisTooLarge { .. } => 4,
            EcsError::CheckFailed(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, EcsError>;
