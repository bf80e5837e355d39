//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by construction, analysis, and persistence routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("{what} is not symmetric: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSymmetric {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("matrix is indefinite: eigenvalue {eigenvalue:.6e} below admissible bound")]
    Indefinite { eigenvalue: f64 },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:.6e}")]
    NotSpd { eigenvalue: f64 },

    #[error("matrix is not skew-symmetric: residual {residual:.3e}")]
    NotSkew { residual: f64 },

    #[error(
        "function is not in the range of the associated map: \
         preimage residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NotInRange { residual: f64, tolerance: f64 },

    #[error(
        "factors do not share a correlation: Frobenius discrepancy {discrepancy:.3e} \
         exceeds tolerance {tolerance:.3e}"
    )]
    CorrelationMismatch { discrepancy: f64, tolerance: f64 },

    #[error("factor does not match the spectral data: residual {residual:.3e}")]
    FactorMismatch { residual: f64 },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("kernel is not symmetric on the grid: residual {residual:.3e}")]
    NonSymmetricKernel { residual: f64 },

    #[error("kernel is not positive semi-definite on the grid: eigenvalue {eigenvalue:.6e}")]
    KernelNotPsd { eigenvalue: f64 },

    #[error("requested {requested} eigenpairs but the grid has only {available} points")]
    TooManyEigenpairs { requested: usize, available: usize },

    #[error("tensor with {entries} entries exceeds the materialization limit of {limit}")]
    TensorTooLarge { entries: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("manifest error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed csv in {path}: {message}")]
    Csv { path: String, message: String },

    #[error("content hash mismatch for {path}: manifest says {expected}, files hash to {actual}")]
    HashMismatch {
        path: String,
        expected: String,
        actual: String,
    },

    #[error("manifest kind mismatch: expected {expected}, found {actual}")]
    KindMismatch { expected: String, actual: String },

    #[error("unsupported schema version {found} (supported: {supported})")]
    SchemaVersion { found: String, supported: String },

    #[error("missing file: {path}")]
    MissingFile { path: String },
}

pub type Result<T> = std::result::Result<T, Error>;
