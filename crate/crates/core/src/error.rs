use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("operator is not positive definite: pivot {index} = {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("QR iteration did not converge after {iterations} sweeps")]
    QrNoConvergence { iterations: usize },

    #[error("complex shift {0} is not followed by its conjugate")]
    UnpairedShift(Complex64),

    #[error(
        "secular equation bracket collapsed at lambda in [{lo:e}, {hi:e}] with |h| = {norm:e}, delta = {delta:e}"
    )]
    BracketCollapse {
        lo: f64,
        hi: f64,
        norm: f64,
        delta: f64,
    },

    #[error("hard case detected: |y1| = {y1_norm:e} is below the threshold {tau:e}")]
    HardCase { y1_norm: f64, tau: f64 },

    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
