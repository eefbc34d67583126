//! Sparse storage, conversions, permutations and scaling for the linear solver.

mod combined;
mod equilibrate;
mod matrix;
pub mod matrix_market;
mod permutation;

pub use combined::{combine_lu, CombinedLU};
pub use equilibrate::{equilibrate, scale_values, Equilibration};
pub use matrix::{spmv, spmv_symmetric_lower, CscMatrix, CsrMatrix, TripletMatrix};
pub use permutation::Permutation;

#[derive(Debug, thiserror::Error)]
pub enum SparseError {
    #[error("entry ({row}, {col}) outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("malformed compressed pointer array")]
    MalformedPointers,
    #[error("indices of slice {slice} are not strictly increasing or out of range")]
    UnsortedIndices { slice: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a permutation")]
    InvalidPermutation,
    #[error("factor entry ({row}, {col}) violates triangular structure")]
    NotTriangular { row: usize, col: usize },
    #[error("U has no structural diagonal in row {row}")]
    MissingDiagonal { row: usize },
    #[error("row {row} is structurally or numerically zero")]
    ZeroRow { row: usize },
    #[error("column {col} is structurally or numerically zero")]
    ZeroColumn { col: usize },
    #[error("Matrix Market line {line}: {msg}")]
    MatrixMarket { line: usize, msg: String },
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

/// `P A Q`.
pub fn permute_system(a: &CscMatrix, p: &Permutation, q: &Permutation) -> CscMatrix {
    a.permute(p, q)
}
