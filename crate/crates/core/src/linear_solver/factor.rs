//! Left-looking sparse LU with partial pivoting (Gilbert–Peierls).
//!
//! Column `k` of the factors is obtained by a sparse triangular solve with the
//! already computed columns of `L`. Its nonzero pattern is the set of rows
//! reachable from the pattern of `A(:, q[k])` in the graph of `L`, found by a
//! depth-first search, so the work is proportional to the flops.
//!
//! Every structurally reachable entry is stored, including exact numerical
//! zeros. The resulting pattern is therefore the symbolic LU pattern of `P A Q`
//! and is closed under elimination in that order, which is what a later
//! pivot-free refactorization relies on.

use crate::sparse_core::{CscMatrix, Permutation};

use super::SolverError;

const UNPIVOTED: usize = usize::MAX;

/// Factors of `P A Q = L U`, columns in pivot order.
#[derive(Debug, Clone)]
pub struct LuFactors {
    /// Strictly lower triangular, unit diagonal implicit.
    pub l: CscMatrix,
    /// Upper triangular with the pivots on the diagonal.
    pub u: CscMatrix,
    pub p: Permutation,
    pub q: Permutation,
}

/// Factor `a` with columns taken in the order `q`.
///
/// A row is an acceptable pivot when its magnitude is at least
/// `pivot_tol` times the column maximum; among acceptable rows the one on the
/// diagonal (`row == q[k]`) is preferred, otherwise the largest is taken.
pub fn gilbert_peierls(a: &CscMatrix, q: &Permutation, pivot_tol: f64) -> Result<LuFactors, SolverError> {
    let n = a.n_cols();
    if a.n_rows() != n || q.len() != n {
        return Err(SolverError::NotSquare {
            rows: a.n_rows(),
            cols: a.n_cols(),
        });
    }

    let nnz_guess = 4 * a.nnz() + n;
    let mut lp = Vec::with_capacity(n + 1);
    let mut li: Vec<usize> = Vec::with_capacity(nnz_guess);
    let mut lx: Vec<f64> = Vec::with_capacity(nnz_guess);
    let mut up = Vec::with_capacity(n + 1);
    let mut ui: Vec<usize> = Vec::with_capacity(nnz_guess);
    let mut ux: Vec<f64> = Vec::with_capacity(nnz_guess);
    lp.push(0);
    up.push(0);

    let mut pinv = vec![UNPIVOTED; n];
    let mut x = vec![0.0f64; n];
    let mut xi = vec![0usize; n];
    let mut stack = vec![0usize; n];
    let mut pstack = vec![0usize; n];
    let mut mark = vec![usize::MAX; n];

    for k in 0..n {
        let col = q.forward()[k];
        let (arows, avals) = a.col(col);

        // symbolic: topological order of the reach of A(:, col)
        let mut top = n;
        for &r in arows {
            if mark[r] != k {
                top = dfs(r, k, top, &lp, &li, &pinv, &mut mark, &mut xi, &mut stack, &mut pstack);
            }
        }
        let reach = &xi[top..n];

        // numeric: sparse triangular solve
        for &r in reach {
            x[r] = 0.0;
        }
        for (&r, &v) in arows.iter().zip(avals) {
            x[r] = v;
        }
        for &r in reach {
            let kk = pinv[r];
            if kk == UNPIVOTED {
                continue;
            }
            let xr = x[r];
            for p in lp[kk]..lp[kk + 1] {
                x[li[p]] -= lx[p] * xr;
            }
        }

        // pivot selection among rows not yet pivoted
        let mut best = UNPIVOTED;
        let mut best_abs = -1.0f64;
        for &r in reach {
            if pinv[r] == UNPIVOTED && x[r].abs() > best_abs {
                best_abs = x[r].abs();
                best = r;
            }
        }
        if best == UNPIVOTED {
            return Err(SolverError::StructurallySingular { column: col });
        }
        if best_abs == 0.0 || !best_abs.is_finite() {
            return Err(SolverError::ZeroPivot { column: col });
        }
        if best != col && mark[col] == k && pinv[col] == UNPIVOTED && x[col].abs() >= pivot_tol * best_abs {
            best = col;
        }
        let pivot = x[best];

        for &r in reach {
            let kk = pinv[r];
            if kk != UNPIVOTED {
                ui.push(kk);
                ux.push(x[r]);
            }
        }
        ui.push(k);
        ux.push(pivot);
        up.push(ui.len());

        pinv[best] = k;
        for &r in reach {
            if pinv[r] == UNPIVOTED {
                li.push(r);
                lx.push(x[r] / pivot);
            }
        }
        lp.push(li.len());
    }

    // rows of L to pivot order, then sort every column
    for r in li.iter_mut() {
        *r = pinv[*r];
    }
    sort_columns(&lp, &mut li, &mut lx);
    sort_columns(&up, &mut ui, &mut ux);

    let mut p_forward = vec![0usize; n];
    for (row, &k) in pinv.iter().enumerate() {
        p_forward[k] = row;
    }
    let l = CscMatrix::new(n, n, lp, li, lx)?;
    let u = CscMatrix::new(n, n, up, ui, ux)?;
    Ok(LuFactors {
        l,
        u,
        p: Permutation::new(p_forward)?,
        q: q.clone(),
    })
}

/// Iterative depth-first search from `start` in the graph of `L`; pushes
/// finished nodes onto `xi[..top]` and returns the new `top`.
#[allow(clippy::too_many_arguments)]
fn dfs(
    start: usize,
    stamp: usize,
    mut top: usize,
    lp: &[usize],
    li: &[usize],
    pinv: &[usize],
    mark: &mut [usize],
    xi: &mut [usize],
    stack: &mut [usize],
    pstack: &mut [usize],
) -> usize {
    let mut head = 0usize;
    stack[0] = start;
    loop {
        let j = stack[head];
        let jcol = pinv[j];
        if mark[j] != stamp {
            mark[j] = stamp;
            pstack[head] = if jcol == UNPIVOTED { 0 } else { lp[jcol] };
        }
        let end = if jcol == UNPIVOTED { 0 } else { lp[jcol + 1] };
        let mut descended = false;
        let mut p = pstack[head];
        while p < end {
            let i = li[p];
            p += 1;
            if mark[i] != stamp {
                pstack[head] = p;
                head += 1;
                stack[head] = i;
                descended = true;
                break;
            }
        }
        if !descended {
            top -= 1;
            xi[top] = j;
            if head == 0 {
                return top;
            }
            head -= 1;
        }
    }
}

fn sort_columns(ptr: &[usize], idx: &mut [usize], vals: &mut [f64]) {
    let mut buf: Vec<(usize, f64)> = Vec::new();
    for k in 0..ptr.len() - 1 {
        let r = ptr[k]..ptr[k + 1];
        if idx[r.clone()].windows(2).all(|w| w[0] < w[1]) {
            continue;
        }
        buf.clear();
        buf.extend(idx[r.clone()].iter().copied().zip(vals[r.clone()].iter().copied()));
        buf.sort_unstable_by_key(|e| e.0);
        for (t, (i, v)) in buf.iter().enumerate() {
            idx[r.start + t] = *i;
            vals[r.start + t] = *v;
        }
    }
}
