use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into two families that the command-line front end maps to
/// distinct exit codes: input validation problems and numerical failures.
#[derive(Debug, Error)]
pub enum FwiError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("grid needs {nodes} nodes, above the budget of {budget}")]
    InfeasibleResolution { nodes: usize, budget: usize },

    #[error("invalid shape parameter: epsilon*h = {product} (allowed 0..={max})")]
    InvalidShapeParameter { product: f64, max: f64 },

    #[error("point ({x}, {z}) lies outside the physical domain")]
    OutsideDomain { x: f64, z: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("factorization failed: zero pivot at column {column}")]
    Factorization { column: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl FwiError {
    pub fn validation(msg: impl Into<String>) -> Self {
        FwiError::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FwiError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        FwiError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FwiError::Factorization { .. } | FwiError::Numerical(_)
        )
    }

    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            FwiError::Validation(_) => "validation",
            FwiError::InfeasibleResolution { .. } => "infeasible-resolution",
            FwiError::InvalidShapeParameter { .. } => "invalid-shape-parameter",
            FwiError::OutsideDomain { .. } => "outside-domain",
            FwiError::ShapeMismatch(_) => "shape-mismatch",
            FwiError::Factorization { .. } => "factorization-failure",
            FwiError::Numerical(_) => "numerical-failure",
            FwiError::Io { .. } => "io",
            FwiError::Format { .. } => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, FwiError>;
