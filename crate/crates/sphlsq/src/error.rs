//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Why a layer cannot support least squares fitting at the requested degree.
#[derive(Debug, Clone, PartialEq)]
pub enum MzDeficiency {
    /// Fewer points than basis functions; the lower frame bound is zero.
    TooFewPoints { points: usize, dim: usize },
    /// The weighted design matrix lost rank at the given column.
    RankDeficient { column: usize },
    /// The smallest Gram eigenvalue is indistinguishable from zero.
    VanishingLowerBound { a_est: f64, b_est: f64 },
}

impl std::fmt::Display for MzDeficiency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MzDeficiency::TooFewPoints { points, dim } => {
                write!(f, "{points} points cannot determine {dim} coefficients")
            }
            MzDeficiency::RankDeficient { column } => {
                write!(f, "design matrix is rank deficient at column {column}")
            }
            MzDeficiency::VanishingLowerBound { a_est, b_est } => {
                write!(f, "lower frame bound {a_est:e} vanishes against upper bound {b_est:e}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {name} = {value} outside [-1, 1]")]
    DomainOutOfRange { name: &'static str, value: f64 },

    #[error("point has norm {norm}, not a unit vector")]
    NotUnit { norm: f64 },

    #[error("operation is implemented for the sphere S^2 only, got d = {d}")]
    UnsupportedDimension { d: usize },

    #[error("exact integer value exceeds the representable range")]
    Overflow,

    #[error("layer has no points")]
    EmptyLayer,

    #[error("need at least {needed} points, layer has {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("matrix must be tall: {rows} rows < {cols} columns")]
    NotTall { rows: usize, cols: usize },

    #[error("matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("layer cannot satisfy the lower sampling bound: {0}")]
    MzDeficient(MzDeficiency),

    #[error("length mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree {degree} is not below the truncation limit {l_max}")]
    DegreeAboveTruncation { degree: u32, l_max: u32 },
}
