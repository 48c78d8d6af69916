use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, OpsError>;

#[derive(Debug, Error)]
pub enum OpsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("matrix is singular")]
    Singular,

    #[error("eigenvalue {eigenvalue} has modulus {modulus:.6} > 1")]
    OutsideUnitDisk { eigenvalue: Complex64, modulus: f64 },

    #[error("not power bounded: {0}")]
    NotPowerBounded(String),

    #[error("not a left {m}-inverse (defect residual {residual:.3e})")]
    NotLeftInverse { m: u32, residual: f64 },

    #[error("no positive definite fixed point: {0}")]
    NoPositiveDefiniteFixedPoint(String),

    #[error("metric does not satisfy S*P^2S = P^2 (residual {0:.3e})")]
    MetricResidual(f64),

    #[error("not an isometry (residual {0:.3e})")]
    NotIsometry(f64),

    #[error("range inclusion fails (residual {residual:.3e}); vector outside ran(B): {witness:?}")]
    RangeInclusion {
        residual: f64,
        witness: Vec<Complex64>,
    },

    #[error("invalid conjugation: {0}")]
    InvalidConjugation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl OpsError {
    /// True for errors caused by malformed input rather than a failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            OpsError::DimensionMismatch(_)
                | OpsError::NotSquare { .. }
                | OpsError::InvalidMatrix(_)
                | OpsError::InvalidArgument(_)
                | OpsError::InvalidConjugation(_)
                | OpsError::Json(_)
                | OpsError::Io(_)
        )
    }
}
