use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error(
        "ground state did not converge after {iterations} iterations (mu = {mu}, residual = {residual:e})"
    )]
    NotConverged {
        iterations: usize,
        mu: f64,
        residual: f64,
    },

    #[error("non-finite amplitude detected at step {step}")]
    NumericalBlowup { step: usize },

    #[error("density is identically zero")]
    EmptyDensity,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown scenario `{name}`; available: {}", available.join(", "))]
    UnknownScenario {
        name: String,
        available: Vec<&'static str>,
    },

    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
