use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not a contraction: norm {norm:.6e}")]
    NotAContraction { norm: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite: minimal eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("resolvent is singular at {point}")]
    SingularResolvent { point: Complex64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("system is not passive quasi-selfadjoint: {0}")]
    NotPqs(String),

    #[error("main operator is not normal")]
    NotNormal,

    #[error("system is not minimal: {0}")]
    NotMinimal(String),

    #[error("recovered parameter {name} is not a contraction: norm {norm:.6e}")]
    ParameterNotContractive { name: &'static str, norm: f64 },

    #[error("function data is not in S^qs: {0}")]
    NotInSqs(String),

    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),

    #[error("point {point} is a pole of W")]
    PolarPoint { point: Complex64 },

    #[error("transfer function is not inner: {0}")]
    NotInner(String),

    #[error("input/output space is not one-dimensional")]
    NotScalar,

    #[error("moment sequence is not positive at step {step}: {value:.3e}")]
    NonPositiveWeight { step: usize, value: f64 },

    #[error("corner entry |d| = {abs:.6} exceeds 1/2")]
    InvalidD { abs: f64 },

    #[error("transfer functions differ at {point}: deviation {deviation:.3e}")]
    TransferMismatch { point: Complex64, deviation: f64 },

    #[error("mixed moments differ at (n, m) = ({n}, {m}): deviation {deviation:.3e}")]
    MomentMismatch { n: usize, m: usize, deviation: f64 },

    #[error("Lanczos and moment recurrence coefficients differ at index {index}: deviation {deviation:.3e}")]
    CoefficientMismatch { index: usize, deviation: f64 },

    #[error("constructed map fails the intertwining relations: residual {residual:.3e}")]
    NotSimilar { residual: f64 },

    #[error("output operator is not S B*: residual {residual:.3e}")]
    NotCoupled { residual: f64 },

    #[error("sample grid is degenerate: {0}")]
    DegenerateGrid(String),

    #[error("unknown tolerance name {0:?}")]
    UnknownTolerance(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
