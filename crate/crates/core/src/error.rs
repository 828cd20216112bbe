//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PncError {
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("point lies on the light cone (|x1| = |x2| within tolerance): ({0}, {1})")]
    BoundaryPoint(f64, f64),
    #[error("points lie in different cones: {0:?} vs {1:?}")]
    ConeMismatch(crate::group::ConeLabel, crate::group::ConeLabel),
    #[error("cone charts differ")]
    ChartMismatch,
    #[error("group grids differ")]
    GridMismatch,
    #[error("group element is not grid aligned and interpolation is disabled: {0}")]
    NotGridAligned(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("Schatten exponent must satisfy p >= 1, got {0}")]
    BadP(f64),
    #[error("grids are not compatible: {0}")]
    NonCompatibleGrid(String),
    #[error("dense kernel would need {needed} bytes, budget is {budget}")]
    MemoryBudgetExceeded { needed: u64, budget: u64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed serialized data: {0}")]
    BadFormat(String),
}

pub type Result<T> = std::result::Result<T, PncError>;
