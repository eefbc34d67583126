//! The linear solver on its own: analyze and factor once, then refactorize
//! a stream of matrices that share the first one's sparsity pattern.
//!
//! ```text
//! cargo run --release --example sparse_refactorization -- 60
//! ```

use gridkkt::linear_solver::{analyze_and_factorize, refine, SequenceSolver, SolverOptions, Strategy};
use gridkkt::sparse_core::matrix_market::{read_coordinate, write_coordinate, Symmetry};
use gridkkt::sparse_core::{CscMatrix, TripletMatrix};

/// Unsymmetric convection-diffusion stencil on a `side × side` grid.
fn stencil(side: usize, wind: f64) -> CscMatrix {
    let n = side * side;
    let mut t = TripletMatrix::new(n, n);
    let idx = |i: usize, j: usize| i * side + j;
    for i in 0..side {
        for j in 0..side {
            let k = idx(i, j);
            t.push(k, k, 4.0).unwrap();
            if i > 0 {
                t.push(k, idx(i - 1, j), -1.0 - wind).unwrap();
            }
            if i + 1 < side {
                t.push(k, idx(i + 1, j), -1.0 + wind).unwrap();
            }
            if j > 0 {
                t.push(k, idx(i, j - 1), -1.0).unwrap();
            }
            if j + 1 < side {
                t.push(k, idx(i, j + 1), -1.0).unwrap();
            }
        }
    }
    t.compress()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let side: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(40);
    let options = SolverOptions::default();
    let a = stencil(side, 0.3);
    let n = a.n_rows();
    let b = vec![1.0; n];

    let handle = analyze_and_factorize(&a, &options)?;
    let sym = handle.symbolic();
    println!(
        "n = {n}, nnz(A) = {}, nnz(L) = {}, nnz(U) = {}, pattern {:016x}",
        a.nnz(),
        sym.l_nnz,
        sym.u_nnz,
        sym.pattern_hash()
    );
    let (_, stats) = refine(&handle, &a, &b, handle.triangular_solve(&b), &options.refine);
    println!(
        "fresh factorization: residual {:.2e} after {} refinement sweeps",
        stats.final_residual, stats.iterations
    );

    for strategy in [Strategy::FactorizeEach, Strategy::RefactorizeSequence] {
        let mut solver = SequenceSolver::new(strategy, options.clone());
        let (mut factor_ns, mut worst) = (0u64, 0.0f64);
        for step in 0..20 {
            let next = stencil(side, 0.3 + 0.02 * step as f64);
            let (_, s) = solver.solve_next(&next, &b)?;
            factor_ns += s.factor_ns;
            worst = worst.max(s.final_residual);
        }
        let st = solver.stats();
        println!(
            "{strategy:>12}: 20 systems, {:.3} ms factorization in total, {} fresh / {} refactorized / {} fallbacks, \
             worst residual {worst:.2e}",
            factor_ns as f64 / 1e6,
            st.fresh_factorizations,
            st.refactorizations,
            st.fallbacks
        );
    }

    let text = write_coordinate(&a, Symmetry::General);
    let back = read_coordinate(&text)?;
    println!("Matrix Market round trip is exact: {}", back == a);
    Ok(())
}
