//! Sparse direct LU for sequences of same-pattern systems.
//!
//! The first matrix goes through the full pipeline: equilibration, a
//! fill-reducing ordering, and a left-looking factorization with partial
//! pivoting. Its row/column permutations and factor patterns are frozen into a
//! [`RefactorizationHandle`]. Later matrices reuse them: values are scattered
//! into the combined `L+U` row storage and eliminated in place without any
//! pivot search. Solves are always followed by iterative refinement, and a
//! tiny pivot or stalled refinement triggers a fresh pivoted factorization.

mod factor;
mod handle;
pub mod ordering;
mod refine;
mod sequence;

pub use factor::{gilbert_peierls, LuFactors};
pub use handle::{
    analyze_and_factorize, analyze_with_ordering, triangular_solve, NumericFactors, RefactorDiagnostics,
    RefactorizationHandle, SymbolicAnalysis,
};
pub use refine::{refine, relative_residual, RefineOptions, SolveStats};
pub use sequence::{solve_sequence, SequenceSolutions, SequenceSolver, SequenceStats, Strategy};

use serde::{Deserialize, Serialize};

use crate::sparse_core::SparseError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Threshold for partial pivoting on the first factorization; 1.0 is strict.
    pub pivot_tol: f64,
    /// Refactorization pivots below `pivot_floor_rel · ‖scaled A‖∞` are rejected.
    pub pivot_floor_rel: f64,
    /// Reuse the first system's equilibration instead of recomputing it.
    pub freeze_scaling: bool,
    pub refine: RefineOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1.0,
            pivot_floor_rel: 1e-13,
            freeze_scaling: false,
            refine: RefineOptions::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("structurally singular: no pivot candidate for column {column}")]
    StructurallySingular { column: usize },
    #[error("singular matrix: zero pivot column {column}")]
    ZeroPivot { column: usize },
    #[error("matrix pattern differs from the analyzed pattern")]
    PatternMismatch,
    #[error("unstable pivot {magnitude:e} below floor {floor:e} at row {row}")]
    UnstablePivot { row: usize, magnitude: f64, floor: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty system sequence")]
    EmptySequence,
    #[error(transparent)]
    Sparse(#[from] SparseError),
}
