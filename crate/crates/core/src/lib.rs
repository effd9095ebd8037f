//! Two-sided bounds for Laplace-Dirichlet eigenvalues.
//!
//! Nonconforming elements (ECR on triangles, EQ1rot on rectangles) give lower
//! bounds; conforming postprocessing gives upper bounds.

pub mod assembly;
pub mod bounds;
pub mod elements;
pub mod error;
pub mod mesh;
pub mod quadrature;
pub mod report;
pub mod solve;

pub use elements::{ElementKind, FeSpace, FieldVector};
pub use error::{Error, Result};
pub use mesh::{build_mesh, refine_uniform, CellKind, DomainKind, Mesh};
