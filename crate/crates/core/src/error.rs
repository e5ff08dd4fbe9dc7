use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("refinement level {level} exceeds the supported maximum {max}")]
    Capacity { level: u32, max: u32 },

    #[error("point ({x}, {y}, {z}) lies outside the unit cube")]
    OutOfDomain { x: f64, y: f64, z: f64 },

    #[error("tube radius {radius} is not below 1/curvature (curvature {curvature})")]
    InvalidTube { curvature: f64, radius: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid fiber geometry: {0}")]
    InvalidFiber(String),

    #[error("fiber radius {radius} overlaps neighbours at grid spacing {spacing}")]
    FiberOverlap { radius: f64, spacing: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{context}: conjugate gradients did not converge in {iterations} iterations (relative residual {residual:e})")]
    NonConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity { .. } => "capacity",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::InvalidTube { .. } => "invalid_tube",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::InvalidFiber(_) => "invalid_fiber",
            Error::FiberOverlap { .. } => "fiber_overlap",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }
}
