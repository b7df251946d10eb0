use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("matrix must be square and non-empty, got {rows} rows with a row of length {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite: leading minor {minor} is not positive (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { minor: usize, min_eigenvalue: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("norm is not differentiable at the origin")]
    AtOrigin,

    #[error("dual norm maximization did not converge after {iterations} iterations (KKT residual {residual:e})")]
    DualNotConverged { iterations: usize, residual: f64 },

    #[error("inconsistent dual norm: {0}")]
    InconsistentDual(String),

    #[error(
        "zero gradient: the operator is undefined at a critical point for a non-Riemannian norm"
    )]
    ZeroGradient,

    #[error("the N-Laplacian is tied to the dimension: got order {order} in dimension {dim}")]
    OperatorOrder { order: usize, dim: usize },

    #[error(
        "finite-difference stencil with step {step:e} crosses the origin at distance {distance:e}"
    )]
    StencilCrossesOrigin { step: f64, distance: f64 },

    #[error("field `{field}` returned a non-finite value")]
    NonFinite { field: String },

    #[error("{what} requires a Riemannian or Euclidean norm, got {norm}")]
    NotRiemannian { what: &'static str, norm: String },

    #[error("{what} requires dimension at least {min}, got {dim}")]
    DimensionUnsupported {
        what: &'static str,
        min: usize,
        dim: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse norm `{input}`: {reason}")]
    ParseNorm { input: String, reason: String },
}
