use thiserror::Error;

/// Errors raised by the numerical kernel, state constructors and protocols.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: defect {defect:e} at ({row}, {col}) exceeds tolerance")]
    NotHermitian { defect: f64, row: usize, col: usize },

    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:e} below tolerance")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid {what}: {invariant} (index {index})")]
    InvalidValue {
        what: &'static str,
        invariant: String,
        index: usize,
    },

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("open paths carry no population")]
    ZeroProbabilityBlock,

    #[error("pair ({i}, {j}) carries no population")]
    ZeroProbabilityPair { i: usize, j: usize },

    #[error("negative radicand {radicand:e} in {measure}")]
    NegativeRadicand { measure: &'static str, radicand: f64 },

    #[error("incompatible reconstruction mode: {0}")]
    IncompatibleMode(String),

    #[error("bad scan grid {grid}: need at least {min} points")]
    BadGrid { grid: usize, min: usize },

    #[error("scan has no positive intensity")]
    AllZeroScan,

    #[error("bad sample count: {0}")]
    BadSampleCount(String),

    #[error("visibility {value} overshoots 1 beyond tolerance")]
    OvershootBeyondTolerance { value: f64 },

    #[error("bad priors ({prior_i}, {prior_j}): must be positive and sum to 1")]
    BadPriors { prior_i: f64, prior_j: f64 },

    #[error("grid of {grid} points per phase is too coarse (need at least 3)")]
    GridTooCoarse { grid: usize },

    #[error("dimension {n} too large for tensor-grid evaluation (max {max})")]
    DimensionTooLarge { n: usize, max: usize },
}

/// Coarse error classes, used by front ends to pick exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input violates a state or detector invariant.
    Validation,
    /// Operand dimensions do not agree.
    Dimension,
    /// A computation could not proceed on otherwise well-formed input.
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotSquare { .. }
            | Error::NotHermitian { .. }
            | Error::InvalidValue { .. }
            | Error::BadDimension(_)
            | Error::BadPriors { .. } => ErrorClass::Validation,
            // A non-PSD Gram handed in by a user is a validation failure too, but
            // the kernel cannot tell who built the matrix.
            Error::NotPsd { .. } => ErrorClass::Numeric,
            Error::DimensionMismatch { .. } => ErrorClass::Dimension,
            _ => ErrorClass::Numeric,
        }
    }

    pub(crate) fn invalid(what: &'static str, invariant: impl Into<String>, index: usize) -> Self {
        Error::InvalidValue {
            what,
            invariant: invariant.into(),
            index,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
