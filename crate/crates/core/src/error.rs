use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole at z = {0}")]
    PoleAtPoint(Complex64),
    #[error("jet order {requested} exceeds the supported maximum {max}")]
    OrderOverflow { requested: usize, max: usize },
    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("degenerate point z = {0}: the immersion fails there")]
    DegeneratePoint(Complex64),
    #[error("umbilic point z = {0}: the entropy coefficient has a pole")]
    UmbilicPoint(Complex64),
    #[error("critical point z = {0}: G' vanishes")]
    CriticalPoint(Complex64),
    #[error("ODE step failure near z = {z}: {reason}")]
    StepFailure { z: Complex64, reason: String },
    #[error("pole on integration path near z = {0}")]
    PoleOnPath(Complex64),
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(Complex64),
    #[error("spinor w1 vanishes at z = {0}: G has a pole")]
    VanishingSpinor(Complex64),
    #[error("grid too coarse: {nx}x{ny} nodes, need at least 5 per axis")]
    GridTooCoarse { nx: usize, ny: usize },
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("quadrature did not converge within {panels} panels (error estimate {estimate:e})")]
    NoConvergence { panels: usize, estimate: f64 },
    #[error("probe circle of radius {radius} passes through a singularity")]
    PoleOnCircle { radius: f64 },
    #[error("umbilic points cover the grid; no admissible nodes left")]
    UmbilicOnGrid,
    #[error("curvature vanishes at z = {0}")]
    ZeroCurvature(Complex64),
    #[error("curvature is not positive at z = {0}")]
    NonpositiveCurvature(Complex64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable machine-readable identifier, used in JSON error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::PoleAtPoint(_) => "PoleAtPoint",
            Error::OrderOverflow { .. } => "OrderOverflow",
            Error::Parse { .. } => "ParseError",
            Error::DegeneratePoint(_) => "DegeneratePoint",
            Error::UmbilicPoint(_) => "UmbilicPoint",
            Error::CriticalPoint(_) => "CriticalPoint",
            Error::StepFailure { .. } => "StepFailure",
            Error::PoleOnPath(_) => "PoleOnPath",
            Error::NotUnimodular(_) => "NotUnimodular",
            Error::VanishingSpinor(_) => "VanishingSpinor",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::GridMismatch => "GridMismatch",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::PoleOnCircle { .. } => "PoleOnCircle",
            Error::UmbilicOnGrid => "UmbilicOnGrid",
            Error::ZeroCurvature(_) => "ZeroCurvature",
            Error::NonpositiveCurvature(_) => "NonpositiveCurvature",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }

    /// Whether the failure comes from malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::InvalidParameter(_) | Error::OrderOverflow { .. }
        )
    }
}
