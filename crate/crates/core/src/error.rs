use thiserror::Error;

use crate::domain::KParameter;
use crate::recovery::Objective;
use crate::tropical::TropicalEigenData;

pub type Result<T, E = RankError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("comparison matrices need n >= 2, got n = {0}")]
    Dimension(usize),

    #[error("expected a square {n}x{n} matrix, row {row} has {len} entries")]
    NotSquare { n: usize, row: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry ({row}, {col}) = {value} is not finite")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("entry {index} = {value} is not strictly positive")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("scores must sum to zero, got sum {sum:e}")]
    NotCentered { sum: f64 },

    #[error("exp argument reaches {magnitude}, above the overflow limit 700; use the log-domain routines")]
    OverflowRisk { magnitude: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("tropical eigenvector is not unique ({} distinct basis vectors)", .0.basis.len())]
    NonUniqueTropical(Box<TropicalEigenData>),

    #[error("max cycle mean {mean:e} is positive; the Kleene star diverges")]
    PositiveCycle { mean: f64 },

    #[error("matrix is not in the fiber: row sums of the rescaled matrix are {row_sums:?}")]
    NotInFiber { row_sums: Vec<f64> },

    #[error("matrix is not in the zero fiber: row levels spread by {spread:e}")]
    NotInZeroFiber { spread: f64, row_levels: Vec<f64> },

    #[error("n*kappa - 2*||Xi|| = {denominator:e} is not positive")]
    DegenerateDenominator { denominator: f64, norm: f64 },

    #[error("perturbation bound does not apply: rho = {rho} >= 1/2")]
    NotApplicable { rho: f64 },

    #[error("fiber decomposition left a row-level spread of {spread:e} (allowed {allowed:e})")]
    InternalInconsistency { spread: f64, allowed: f64 },

    #[error("objective {0:?} is not present in the table")]
    MissingObjective(Objective),

    #[error("trial {trial} failed at k = {k}: {source}")]
    Trial {
        trial: usize,
        k: KParameter,
        #[source]
        source: Box<RankError>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl RankError {
    /// Errors that describe the input data rather than the invocation.
    pub fn is_domain(&self) -> bool {
        match self {
            RankError::Trial { source, .. } => source.is_domain(),
            RankError::Io(_) | RankError::Json(_) | RankError::Csv(_) | RankError::Parse(_) => {
                false
            }
            RankError::InvalidParameter(_) => false,
            _ => true,
        }
    }

    /// Short machine-readable tag for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            RankError::Dimension(_) => "Dimension",
            RankError::NotSquare { .. } => "NotSquare",
            RankError::DimensionMismatch { .. } => "DimensionMismatch",
            RankError::NonFinite { .. } => "NonFinite",
            RankError::NonPositiveEntry { .. } => "NonPositiveEntry",
            RankError::NotCentered { .. } => "NotCentered",
            RankError::OverflowRisk { .. } => "OverflowRisk",
            RankError::InvalidParameter(_) => "InvalidParameter",
            RankError::NoConvergence { .. } => "NoConvergence",
            RankError::NonUniqueTropical(_) => "NonUniqueTropical",
            RankError::PositiveCycle { .. } => "PositiveCycle",
            RankError::NotInFiber { .. } => "NotInFiber",
            RankError::NotInZeroFiber { .. } => "NotInZeroFiber",
            RankError::DegenerateDenominator { .. } => "DegenerateDenominator",
            RankError::NotApplicable { .. } => "NotApplicable",
            RankError::InternalInconsistency { .. } => "InternalInconsistency",
            RankError::MissingObjective(_) => "MissingObjective",
            RankError::Trial { .. } => "Trial",
            RankError::Parse(_) => "Parse",
            RankError::Io(_) => "Io",
            RankError::Json(_) => "Json",
            RankError::Csv(_) => "Csv",
        }
    }
}
