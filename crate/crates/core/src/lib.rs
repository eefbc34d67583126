//! AC optimal power flow by a primal barrier method whose Newton (KKT)
//! systems share one sparsity pattern, solved with a sparse LU that is
//! analyzed and pivoted once and then only refactorized.
//!
//! Modules, bottom up:
//! - [`sparse_core`]: CSC/CSR storage, permutations, equilibration, Matrix Market I/O.
//! - [`linear_solver`]: ordering, pivoted LU, refactorization, refinement, sequences.
//! - [`grid_model`]: MATPOWER cases, admittances, synthetic tiled networks.
//! - [`acopf_nlp`]: the polar formulation and its slack-form reformulation.
//! - [`interior_point`]: the barrier driver, generic over [`interior_point::SlackProblem`].
//! - [`harness`]: solve / bench / replay / report, as used by the `gridkkt` binary.

// NaN must fail the bound and pivot checks, which `!(a <= b)` expresses directly.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense kernels index several arrays with one counter.
#![allow(clippy::needless_range_loop)]

pub mod acopf_nlp;
pub mod grid_model;
pub mod harness;
pub mod interior_point;
pub mod linear_solver;
pub mod sparse_core;
