use super::{CscMatrix, Permutation, SparseError};

/// Row-major storage of both LU factors of `P A Q`.
///
/// Row `i` holds the strictly-lower entries of `L` (columns `< i`) followed by
/// the diagonal and upper entries of `U` (columns `≥ i`). The unit diagonal of
/// `L` is implicit. `U`'s diagonal is always stored, even when it equals one,
/// so values can be overwritten in place by a refactorization.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedLU {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag_pos: Vec<usize>,
    p: Permutation,
    q: Permutation,
}

impl CombinedLU {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Position of `U(i, i)` within the value array.
    pub fn diag_pos(&self) -> &[usize] {
        &self.diag_pos
    }

    pub fn row_perm(&self) -> &Permutation {
        &self.p
    }

    pub fn col_perm(&self) -> &Permutation {
        &self.q
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.values[self.diag_pos[i]]
    }

    /// Number of stored entries in `L` (strictly lower) and `U` (with diagonal).
    pub fn factor_nnz(&self) -> (usize, usize) {
        let l: usize = (0..self.n).map(|i| self.diag_pos[i] - self.row_ptr[i]).sum();
        (l, self.nnz() - l)
    }

    /// Split back into `L` (strictly lower, unit diagonal implicit) and `U` in column form.
    pub fn split(&self) -> (CscMatrix, CscMatrix) {
        let n = self.n;
        let mut l = super::TripletMatrix::new(n, n);
        let mut u = super::TripletMatrix::new(n, n);
        for i in 0..n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                let target = if j < i { &mut l } else { &mut u };
                target.push(i, j, self.values[p]).expect("indices in range");
            }
        }
        (l.compress(), u.compress())
    }

    /// Forward substitution with the implicit-unit `L`, in place.
    pub fn solve_lower_in_place(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let mut s = x[i];
            for p in self.row_ptr[i]..self.diag_pos[i] {
                s -= self.values[p] * x[self.col_idx[p]];
            }
            x[i] = s;
        }
    }

    /// Backward substitution with `U`, in place.
    pub fn solve_upper_in_place(&self, x: &mut [f64]) {
        for i in (0..self.n).rev() {
            let d = self.diag_pos[i];
            let mut s = x[i];
            for p in d + 1..self.row_ptr[i + 1] {
                s -= self.values[p] * x[self.col_idx[p]];
            }
            x[i] = s / self.values[d];
        }
    }

    /// Solve `(L U) x = b` in the permuted index space.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        self.solve_lower_in_place(x);
        self.solve_upper_in_place(x);
    }
}

/// Merge column-stored factors of `P A Q = L U` into one row-major object.
///
/// `l` must be lower triangular; any diagonal entries it carries must equal
/// one and are dropped (the unit diagonal is implicit). `u` must be upper
/// triangular with every diagonal position structurally present.
pub fn combine_lu(l: &CscMatrix, u: &CscMatrix, p: Permutation, q: Permutation) -> Result<CombinedLU, SparseError> {
    let n = u.n_rows();
    if u.n_cols() != n || l.n_rows() != n || l.n_cols() != n || p.len() != n || q.len() != n {
        return Err(SparseError::DimensionMismatch {
            expected: n,
            found: l.n_rows(),
        });
    }
    let lr = l.to_csr();
    let ur = u.to_csr();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(l.nnz() + u.nnz());
    let mut values = Vec::with_capacity(l.nnz() + u.nnz());
    let mut diag_pos = Vec::with_capacity(n);
    row_ptr.push(0);
    for i in 0..n {
        let (lc, lv) = lr.row(i);
        for (&j, &v) in lc.iter().zip(lv) {
            if j > i {
                return Err(SparseError::NotTriangular { row: i, col: j });
            }
            if j == i {
                if v != 1.0 {
                    return Err(SparseError::NotTriangular { row: i, col: j });
                }
                continue;
            }
            col_idx.push(j);
            values.push(v);
        }
        let (uc, uv) = ur.row(i);
        if uc.first() != Some(&i) {
            if uc.first().is_some_and(|&j| j < i) {
                return Err(SparseError::NotTriangular { row: i, col: uc[0] });
            }
            return Err(SparseError::MissingDiagonal { row: i });
        }
        diag_pos.push(col_idx.len());
        col_idx.extend_from_slice(uc);
        values.extend_from_slice(uv);
        row_ptr.push(col_idx.len());
    }
    Ok(CombinedLU {
        n,
        row_ptr,
        col_idx,
        values,
        diag_pos,
        p,
        q,
    })
}
