use thiserror::Error;

/// Crate-wide error type. Input problems and numerical failures are kept
/// distinct so the CLI can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
    #[error("data length {got} does not match {rows}x{cols}")]
    DataLength { rows: usize, cols: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("entries must be finite")]
    NonFinite,
    #[error("matrix is not Hermitian: asymmetry {deviation:.3e} exceeds tolerance")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not normal: commutator norm {deviation:.3e} exceeds tolerance")]
    NotNormal { deviation: f64 },
    #[error("matrix is not a nonnegative multiple of a positive semidefinite matrix: {0}")]
    NotPsdMultiple(String),
    #[error("{algorithm} did not converge within {iterations} iterations")]
    Convergence {
        algorithm: &'static str,
        iterations: usize,
    },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("vector must be nonzero")]
    ZeroVector,
    #[error("vector must have unit norm, got {norm}")]
    NotUnit { norm: f64 },
    #[error("operation undefined for the zero matrix")]
    ZeroMatrix,
    #[error("canonical decomposition requires the product bound to hold: {0}")]
    GateNotSatisfied(String),
    #[error(
        "block split verification failed: off-diagonal entry of magnitude \
         {offender:.3e} exceeds threshold {threshold:.3e}"
    )]
    SplitVerification { offender: f64, threshold: f64 },
    #[error(
        "reassembled decomposition misses the input by {residual:.3e} \
         (threshold {threshold:.3e})"
    )]
    Reassembly { residual: f64, threshold: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
