use crate::sparse_core::{combine_lu, equilibrate, scale_values, CombinedLU, CscMatrix, Permutation};

use super::factor::gilbert_peierls;
use super::ordering::amd_order;
use super::{SolverError, SolverOptions};

/// Frozen outcome of the first pivoted factorization.
#[derive(Debug, Clone)]
pub struct SymbolicAnalysis {
    /// Fill-reducing column order from minimum degree on `A + Aᵀ`.
    pub ordering: Permutation,
    /// Row permutation chosen by pivoting.
    pub p: Permutation,
    /// Column permutation (equal to `ordering`).
    pub q: Permutation,
    pub l_nnz: usize,
    pub u_nnz: usize,
    a_col_ptr: Vec<usize>,
    a_row_idx: Vec<usize>,
    a_pattern_hash: u64,
    /// Destination of every entry of `A` inside the combined factor storage.
    a_to_lu: Vec<usize>,
}

impl SymbolicAnalysis {
    pub fn pattern_hash(&self) -> u64 {
        self.a_pattern_hash
    }

    pub fn matches(&self, a: &CscMatrix) -> bool {
        a.col_ptr() == self.a_col_ptr.as_slice() && a.row_idx() == self.a_row_idx.as_slice()
    }
}

#[derive(Debug, Clone)]
pub struct NumericFactors {
    pub lu: CombinedLU,
    /// `max |U| / max |scaled A|`
    pub growth: f64,
    pub min_pivot: f64,
}

/// Everything needed to refactorize and solve a same-pattern matrix.
#[derive(Debug, Clone)]
pub struct RefactorizationHandle {
    symbolic: SymbolicAnalysis,
    numeric: NumericFactors,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    scaled_norm: f64,
    options: SolverOptions,
    col_pos: Vec<usize>,
}

/// Diagnostics of one refactorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefactorDiagnostics {
    pub min_pivot: f64,
    pub pivot_floor: f64,
    pub growth: f64,
}

/// Equilibrate, order, factor with partial pivoting, and freeze the result.
pub fn analyze_and_factorize(a: &CscMatrix, options: &SolverOptions) -> Result<RefactorizationHandle, SolverError> {
    check_square(a)?;
    let ordering = amd_order(a);
    analyze_with_ordering(a, ordering, options)
}

/// As [`analyze_and_factorize`] with a precomputed fill-reducing column order.
pub fn analyze_with_ordering(
    a: &CscMatrix,
    ordering: Permutation,
    options: &SolverOptions,
) -> Result<RefactorizationHandle, SolverError> {
    check_square(a)?;
    let eq = equilibrate(a)?;
    let scaled_norm = eq.scaled.norm_inf();
    let f = gilbert_peierls(&eq.scaled, &ordering, options.pivot_tol)?;
    let l_nnz = f.l.nnz();
    let u_nnz = f.u.nnz();
    let lu = combine_lu(&f.l, &f.u, f.p.clone(), f.q.clone())?;

    let pinv = f.p.inverse();
    let qinv = f.q.inverse();
    let mut a_to_lu = Vec::with_capacity(a.nnz());
    for (i, j, _) in a.triplets() {
        let (r, c) = (pinv[i], qinv[j]);
        let row = &lu.col_idx()[lu.row_ptr()[r]..lu.row_ptr()[r + 1]];
        let pos = row
            .binary_search(&c)
            .expect("pattern of PAQ is contained in the pattern of L + U");
        a_to_lu.push(lu.row_ptr()[r] + pos);
    }

    let (growth, min_pivot) = pivot_stats(&lu, eq.scaled.max_abs());
    let n = a.n_rows();
    Ok(RefactorizationHandle {
        symbolic: SymbolicAnalysis {
            p: f.p,
            q: f.q,
            ordering,
            l_nnz,
            u_nnz,
            a_col_ptr: a.col_ptr().to_vec(),
            a_row_idx: a.row_idx().to_vec(),
            a_pattern_hash: a.pattern_hash(),
            a_to_lu,
        },
        numeric: NumericFactors { lu, growth, min_pivot },
        row_scale: eq.row_scale,
        col_scale: eq.col_scale,
        scaled_norm,
        options: options.clone(),
        col_pos: vec![usize::MAX; n],
    })
}

fn check_square(a: &CscMatrix) -> Result<(), SolverError> {
    if a.n_rows() != a.n_cols() {
        return Err(SolverError::NotSquare {
            rows: a.n_rows(),
            cols: a.n_cols(),
        });
    }
    Ok(())
}

fn pivot_stats(lu: &CombinedLU, a_max: f64) -> (f64, f64) {
    let u_max = (0..lu.n())
        .flat_map(|i| lu.values()[lu.diag_pos()[i]..lu.row_ptr()[i + 1]].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let min_pivot = (0..lu.n()).map(|i| lu.diag(i).abs()).fold(f64::INFINITY, f64::min);
    let growth = if a_max > 0.0 { u_max / a_max } else { 1.0 };
    (growth, min_pivot)
}

impl RefactorizationHandle {
    pub fn symbolic(&self) -> &SymbolicAnalysis {
        &self.symbolic
    }

    pub fn numeric(&self) -> &NumericFactors {
        &self.numeric
    }

    pub fn n(&self) -> usize {
        self.numeric.lu.n()
    }

    pub fn row_scale(&self) -> &[f64] {
        &self.row_scale
    }

    pub fn col_scale(&self) -> &[f64] {
        &self.col_scale
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// `‖R A C‖∞` of the system last factored.
    pub fn scaled_norm(&self) -> f64 {
        self.scaled_norm
    }

    /// Recompute the numeric factors of `a_new` in the frozen pivot order, no pivot search.
    pub fn refactorize(&mut self, a_new: &CscMatrix) -> Result<RefactorDiagnostics, SolverError> {
        if !self.symbolic.matches(a_new) {
            return Err(SolverError::PatternMismatch);
        }
        if !self.options.freeze_scaling {
            let eq = equilibrate(a_new)?;
            self.row_scale = eq.row_scale;
            self.col_scale = eq.col_scale;
        }
        let scaled = scale_values(a_new, &self.row_scale, &self.col_scale);
        self.scaled_norm = scaled.norm_inf();
        let pivot_floor = self.options.pivot_floor_rel * self.scaled_norm;

        let lu = &mut self.numeric.lu;
        let n = lu.n();
        let row_ptr = lu.row_ptr().to_vec();
        let col_idx = lu.col_idx().to_vec();
        let diag_pos = lu.diag_pos().to_vec();
        let vals = lu.values_mut();
        vals.iter_mut().for_each(|v| *v = 0.0);
        for (t, &v) in scaled.values().iter().enumerate() {
            vals[self.symbolic.a_to_lu[t]] = v;
        }

        let col_pos = &mut self.col_pos;
        let mut min_pivot = f64::INFINITY;
        for i in 0..n {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            for p in lo..hi {
                col_pos[col_idx[p]] = p;
            }
            for p in lo..diag_pos[i] {
                let k = col_idx[p];
                let lik = vals[p] / vals[diag_pos[k]];
                vals[p] = lik;
                if lik == 0.0 {
                    continue;
                }
                for s in diag_pos[k] + 1..row_ptr[k + 1] {
                    let dst = col_pos[col_idx[s]];
                    debug_assert!(
                        dst != usize::MAX && dst >= lo && dst < hi,
                        "fill outside frozen pattern"
                    );
                    vals[dst] -= lik * vals[s];
                }
            }
            for p in lo..hi {
                col_pos[col_idx[p]] = usize::MAX;
            }
            let piv = vals[diag_pos[i]].abs();
            if !(piv >= pivot_floor) || !piv.is_finite() {
                return Err(SolverError::UnstablePivot {
                    row: i,
                    magnitude: piv,
                    floor: pivot_floor,
                });
            }
            min_pivot = min_pivot.min(piv);
        }

        let (growth, _) = pivot_stats(&self.numeric.lu, scaled.max_abs());
        self.numeric.growth = growth;
        self.numeric.min_pivot = min_pivot;
        Ok(RefactorDiagnostics {
            min_pivot,
            pivot_floor,
            growth,
        })
    }

    /// `x = C Q U⁻¹ L⁻¹ P R b`; no refinement.
    pub fn triangular_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(b.len(), n);
        let lu = &self.numeric.lu;
        let p = lu.row_perm().forward();
        let mut z: Vec<f64> = p.iter().map(|&i| self.row_scale[i] * b[i]).collect();
        lu.solve_in_place(&mut z);
        let mut x = vec![0.0; n];
        for (k, &j) in lu.col_perm().forward().iter().enumerate() {
            x[j] = self.col_scale[j] * z[k];
        }
        x
    }
}

pub fn triangular_solve(handle: &RefactorizationHandle, b: &[f64]) -> Vec<f64> {
    handle.triangular_solve(b)
}
