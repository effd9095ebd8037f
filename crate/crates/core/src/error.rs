use thiserror::Error;

use crate::elements::ElementKind;
use crate::mesh::CellKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("number of subdivisions must be at least 1")]
    ZeroSubdivisions,

    #[error("element {kind:?} cannot be used on {cell_kind:?} cells")]
    KindMismatch { kind: ElementKind, cell_kind: CellKind },

    #[error("no quadrature rule of degree {0} on {1:?} cells")]
    UnsupportedDegree(usize, CellKind),

    #[error("cell {0} is degenerate (zero measure)")]
    DegenerateCell(usize),

    #[error("no free degrees of freedom remain after imposing boundary conditions")]
    EmptyFreeSpace,

    #[error("matrix is not positive definite (non-positive pivot at factorization index {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge after {iterations} iterations (residuals {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requested {requested} eigenpairs but the problem has dimension {dim}")]
    TooManyEigenpairs { requested: usize, dim: usize },

    #[error("field has zero L2 norm")]
    ZeroField,

    #[error("no exact eigenpair is known for this domain")]
    ExactUnavailable,

    #[error("bound inversion for eigenvalue {j}: upper {upper} < lower {lower}")]
    BoundInversion { j: usize, lower: f64, upper: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
