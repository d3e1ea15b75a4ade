use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertices are collinear (twice signed area {twice_area:e})")]
    CollinearVertices { twice_area: f64 },

    #[error("refinement level {level} exceeds the maximum of {max}")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("mesh at level {level} has no interior nodes")]
    NoInteriorNodes { level: u32 },

    #[error("initial data is not finite at ({x}, {y})")]
    NonFiniteSample { x: f64, y: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trajectory has no samples")]
    EmptyTrajectory,

    #[error("initial energy is zero")]
    ZeroEnergy,

    #[error("point ({x}, {y}) lies outside the reference triangle")]
    OutsideDomain { x: f64, y: f64 },

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("convergence study needs at least 3 levels, got {0}")]
    TooFewLevels(usize),

    #[error("non-finite value encountered: {0}")]
    NumericalFailure(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
