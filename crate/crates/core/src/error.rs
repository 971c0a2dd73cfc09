use thiserror::Error;

use crate::reduction::{FixedPointDiagnostics, NewtonDiagnostics};
use crate::spectral::Field;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("array shape {found:?} does not match grid shape {expected:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("fields live on different grids or frames")]
    Mismatch,

    #[error("symbol is not finite ({value}) at retained mode ({k1}, {k2})")]
    NonFiniteSymbol { k1: f64, k2: f64, value: f64 },

    #[error("unknown lump family {0}: only k = 1 and k = 2 are tabulated")]
    UnknownLump(usize),

    #[error("derivative order ({a}, {b}) exceeds total order 4")]
    DerivativeOrder { a: usize, b: usize },

    #[error("division hazard: outside-cone mode ({k1}, {k2}) has n = {value:e}")]
    DivisionHazard { k1: f64, k2: f64, value: f64 },

    #[error("high-frequency fixed point failed: {reason}")]
    FixedPoint {
        reason: String,
        diagnostics: Box<FixedPointDiagnostics>,
    },

    #[error("newton iteration failed: {reason}")]
    Newton {
        reason: String,
        best: Box<Field>,
        diagnostics: Box<NewtonDiagnostics>,
    },

    #[error("krylov solver stalled at relative residual {relative_residual:e} after {iterations} iterations")]
    Krylov {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("eigen-iteration did not converge: {0}")]
    Eigen(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
