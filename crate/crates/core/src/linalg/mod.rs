//! Sparse and dense real linear algebra.
//!
//! The sparse LU factorization is the production solver; the dense LU is a
//! reference used to cross-check it on small systems.

mod complex;
mod dense;
mod lu;
mod sparse;

pub use complex::{real_split, solve_complex};
pub use dense::{dense_solve, DenseMatrix, DENSE_MAX_DIM};
pub use lu::{sparse_lu_solve, sparse_lu_solve_complex, Scalar, SolveReport, SparseLu, ORDERING_NAME, PIVOT_THRESHOLD};
pub use sparse::{SparseMatrix, TripletBuilder};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular pivot at index {index} (magnitude {magnitude:e})")]
    SingularPivot { index: usize, magnitude: f64 },
    #[error("dense solver limited to n <= {max}, got {dim}")]
    TooLarge { dim: usize, max: usize },
    #[error("fill-reducing ordering failed: {0}")]
    Ordering(String),
}
