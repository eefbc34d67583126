use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::{Permutation, SparseError};

/// Coordinate-format assembly buffer. Duplicates are summed by [`TripletMatrix::compress`].
#[derive(Debug, Clone, PartialEq)]
pub struct TripletMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl TripletMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: Vec::new(),
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            values: Vec::with_capacity(cap),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) -> Result<(), SparseError> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(SparseError::IndexOutOfBounds {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        self.rows.push(row);
        self.cols.push(col);
        self.values.push(value);
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).map(move |t| (self.rows[t], self.cols[t], self.values[t]))
    }

    /// Compressed column form with duplicates summed. Explicit zeros are kept.
    pub fn compress(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.cols {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let nnz = self.len();
        let mut rows = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        for t in 0..nnz {
            let c = self.cols[t];
            let dst = next[c];
            rows[dst] = self.rows[t];
            vals[dst] = self.values[t];
            next[c] += 1;
        }

        let mut col_ptr = Vec::with_capacity(self.n_cols + 1);
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for j in 0..self.n_cols {
            let (lo, hi) = (counts[j], counts[j + 1]);
            order.clear();
            order.extend(lo..hi);
            // stable sort keeps summation order deterministic
            order.sort_by_key(|&p| rows[p]);
            for &p in &order {
                if row_idx.len() > col_ptr[j] && *row_idx.last().unwrap() == rows[p] {
                    *values.last_mut().unwrap() += vals[p];
                } else {
                    row_idx.push(rows[p]);
                    values.push(vals[p]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_ptr,
            row_idx,
            values,
        }
    }
}

/// Compressed sparse column matrix. Row indices are strictly increasing within each column.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Compressed sparse row matrix. Column indices are strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

fn check_compressed(
    n_outer: usize,
    n_inner: usize,
    ptr: &[usize],
    idx: &[usize],
    n_values: usize,
) -> Result<(), SparseError> {
    if ptr.len() != n_outer + 1 || ptr[0] != 0 || *ptr.last().unwrap() != idx.len() {
        return Err(SparseError::MalformedPointers);
    }
    if n_values != idx.len() {
        return Err(SparseError::MalformedPointers);
    }
    for k in 0..n_outer {
        if ptr[k] > ptr[k + 1] {
            return Err(SparseError::MalformedPointers);
        }
        let slice = &idx[ptr[k]..ptr[k + 1]];
        for w in slice.windows(2) {
            if w[0] >= w[1] {
                return Err(SparseError::UnsortedIndices { slice: k });
            }
        }
        if let Some(&last) = slice.last() {
            if last >= n_inner {
                return Err(SparseError::UnsortedIndices { slice: k });
            }
        }
    }
    Ok(())
}

fn pattern_hash_of(kind: u8, dims: (usize, usize), ptr: &[usize], idx: &[usize]) -> u64 {
    let mut h = DefaultHasher::new();
    kind.hash(&mut h);
    dims.hash(&mut h);
    ptr.hash(&mut h);
    idx.hash(&mut h);
    h.finish()
}

impl CscMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        check_compressed(n_cols, n_rows, &col_ptr, &row_idx, values.len())?;
        Ok(Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            col_ptr: vec![0; n_cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Stores every entry of `dense` whose magnitude is nonzero.
    pub fn from_dense(dense: &[Vec<f64>]) -> Self {
        let n_rows = dense.len();
        let n_cols = dense.first().map_or(0, Vec::len);
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for j in 0..n_cols {
            for (i, row) in dense.iter().enumerate() {
                if row[j] != 0.0 {
                    row_idx.push(i);
                    values.push(row[j]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for j in 0..self.n_cols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                d[self.row_idx[p]][j] += self.values[p];
            }
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (rows, vals) = self.col(j);
        rows.binary_search(&i).ok().map(|p| vals[p])
    }

    /// Position of `(i, j)` in the value array, if structurally present.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (rows, _) = self.col(j);
        rows.binary_search(&i).ok().map(|p| self.col_ptr[j] + p)
    }

    pub fn same_pattern(&self, other: &CscMatrix) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.col_ptr == other.col_ptr
            && self.row_idx == other.row_idx
    }

    pub fn pattern_hash(&self) -> u64 {
        pattern_hash_of(b'c', (self.n_rows, self.n_cols), &self.col_ptr, &self.row_idx)
    }

    /// Same pattern, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, SparseError> {
        if values.len() != self.nnz() {
            return Err(SparseError::DimensionMismatch {
                expected: self.nnz(),
                found: values.len(),
            });
        }
        Ok(Self { values, ..self.clone() })
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0f64; self.n_rows];
        for (p, &i) in self.row_idx.iter().enumerate() {
            sums[i] += self.values[p].abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for j in 0..self.n_cols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
        y
    }

    pub fn transpose(&self) -> CscMatrix {
        let t = self.to_csr();
        CscMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            col_ptr: t.row_ptr,
            row_idx: t.col_idx,
            values: t.values,
        }
    }

    /// Reorders storage to row-major; values are moved, never recomputed.
    pub fn to_csr(&self) -> CsrMatrix {
        let (row_ptr, col_idx, values) =
            transpose_compressed(self.n_cols, self.n_rows, &self.col_ptr, &self.row_idx, &self.values);
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `P A Q` where `(PAQ)[k][l] = A[p[k]][q[l]]`.
    pub fn permute(&self, p: &Permutation, q: &Permutation) -> CscMatrix {
        assert_eq!(p.len(), self.n_rows);
        assert_eq!(q.len(), self.n_cols);
        let pinv = p.inverse();
        let mut col_ptr = Vec::with_capacity(self.n_cols + 1);
        let mut row_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        col_ptr.push(0);
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for &j in q.forward() {
            buf.clear();
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                buf.push((pinv[self.row_idx[p]], self.values[p]));
            }
            buf.sort_unstable_by_key(|e| e.0);
            for &(i, v) in &buf {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Pattern of `A + Aᵀ` without the diagonal, as adjacency lists.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_cols;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for j in 0..n {
            for &i in &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]] {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |p| (self.row_idx[p], j, self.values[p]))
        })
    }
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        check_compressed(n_rows, n_cols, &row_ptr, &col_idx, values.len())?;
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
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

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|p| self.row_ptr[i] + p)
    }

    pub fn pattern_hash(&self) -> u64 {
        pattern_hash_of(b'r', (self.n_rows, self.n_cols), &self.row_ptr, &self.col_idx)
    }

    pub fn to_csc(&self) -> CscMatrix {
        let (col_ptr, row_idx, values) =
            transpose_compressed(self.n_rows, self.n_cols, &self.row_ptr, &self.col_idx, &self.values);
        CscMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.to_csc().to_dense()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        spmv(self, x)
    }
}

/// Swap the roles of the outer and inner dimension of a compressed structure.
fn transpose_compressed(
    n_outer: usize,
    n_inner: usize,
    ptr: &[usize],
    idx: &[usize],
    vals: &[f64],
) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let nnz = idx.len();
    let mut out_ptr = vec![0usize; n_inner + 1];
    for &i in idx {
        out_ptr[i + 1] += 1;
    }
    for i in 0..n_inner {
        out_ptr[i + 1] += out_ptr[i];
    }
    let mut next = out_ptr.clone();
    let mut out_idx = vec![0usize; nnz];
    let mut out_vals = vec![0.0; nnz];
    for j in 0..n_outer {
        for p in ptr[j]..ptr[j + 1] {
            let i = idx[p];
            let dst = next[i];
            out_idx[dst] = j;
            out_vals[dst] = vals[p];
            next[i] += 1;
        }
    }
    (out_ptr, out_idx, out_vals)
}

/// Row-major sparse matrix-vector product.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), a.n_cols);
    (0..a.n_rows)
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
        })
        .collect()
}

/// Product with a symmetric matrix of which only the lower triangle (`col ≤ row`) is stored.
pub fn spmv_symmetric_lower(a: &CsrMatrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.n_rows, a.n_cols);
    assert_eq!(x.len(), a.n_cols);
    let mut y = vec![0.0; a.n_rows];
    for i in 0..a.n_rows {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            debug_assert!(j <= i, "upper-triangle entry in lower-stored matrix");
            y[i] += v * x[j];
            if j != i {
                y[j] += v * x[i];
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_triplets(rng: &mut ChaCha8Rng, n: usize, count: usize) -> TripletMatrix {
        let mut t = TripletMatrix::new(n, n);
        for _ in 0..count {
            t.push(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(-1.0..1.0))
                .unwrap();
        }
        t
    }

    #[test]
    fn empty_triplets_give_zero_pointers() {
        let a = TripletMatrix::new(3, 4).compress();
        assert_eq!(a.col_ptr(), &[0, 0, 0, 0, 0]);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletMatrix::new(2, 2);
        t.push(0, 0, 1.0).unwrap();
        t.push(0, 0, 2.0).unwrap();
        let a = t.compress();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), Some(3.0));
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        let mut t = TripletMatrix::new(2, 2);
        assert!(t.push(2, 0, 1.0).is_err());
    }

    #[test]
    fn compress_matches_dense_accumulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = random_triplets(&mut rng, 50, 400);
        let mut dense = vec![vec![0.0; 50]; 50];
        for (i, j, v) in t.entries() {
            dense[i][j] += v;
        }
        let a = t.compress();
        let got = a.to_dense();
        for i in 0..50 {
            for j in 0..50 {
                assert!((got[i][j] - dense[i][j]).abs() <= 1e-15);
            }
        }
        CscMatrix::new(50, 50, a.col_ptr.clone(), a.row_idx.clone(), a.values.clone()).unwrap();
    }

    #[test]
    fn identity_conversion_keeps_arrays() {
        let a = CscMatrix::identity(5);
        let r = a.to_csr();
        assert_eq!(r.row_ptr(), a.col_ptr());
        assert_eq!(r.col_idx(), a.row_idx());
        assert_eq!(r.values(), a.values());
    }

    #[test]
    fn row_vector_pointer_shapes_swap() {
        let a = CscMatrix::from_dense(&[vec![1.0, 0.0, 2.0, 3.0]]);
        assert_eq!(a.col_ptr().len(), 5);
        let r = a.to_csr();
        assert_eq!(r.row_ptr(), &[0, 3]);
        assert_eq!(r.col_idx(), &[0, 2, 3]);
        assert_eq!(r.to_csc(), a);
    }

    #[test]
    fn spmv_identity_and_zero() {
        let x = vec![1.5, -2.0, 3.25];
        assert_eq!(spmv(&CscMatrix::identity(3).to_csr(), &x), x);
        assert_eq!(spmv(&CscMatrix::zeros(3, 3).to_csr(), &x), vec![0.0; 3]);
    }

    #[test]
    fn spmv_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_triplets(&mut rng, 40, 300).compress();
        let x: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = a.to_dense();
        let y = spmv(&a.to_csr(), &x);
        for i in 0..40 {
            let want: f64 = (0..40).map(|j| d[i][j] * x[j]).sum();
            let scale: f64 = (0..40).map(|j| (d[i][j] * x[j]).abs()).sum::<f64>().max(1.0);
            assert!((y[i] - want).abs() / scale < 1e-14);
        }
        let y2 = a.mul_vec(&x);
        for i in 0..40 {
            assert!((y2[i] - y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_lower_spmv_expands() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 30;
        let mut full = vec![vec![0.0; n]; n];
        let mut lower = TripletMatrix::new(n, n);
        for _ in 0..120 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..=i);
            let v: f64 = rng.gen_range(-1.0..1.0);
            lower.push(i, j, v).unwrap();
            full[i][j] += v;
            if i != j {
                full[j][i] += v;
            }
        }
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = spmv_symmetric_lower(&lower.compress().to_csr(), &x);
        for i in 0..n {
            let want: f64 = (0..n).map(|j| full[i][j] * x[j]).sum();
            assert!((y[i] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn permute_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        let a = random_triplets(&mut rng, n, 80).compress();
        let mut pf: Vec<usize> = (0..n).collect();
        let mut qf: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            pf.swap(i, rng.gen_range(0..=i));
            qf.swap(i, rng.gen_range(0..=i));
        }
        let p = Permutation::new(pf).unwrap();
        let q = Permutation::new(qf).unwrap();
        let d = a.to_dense();
        let b = a.permute(&p, &q).to_dense();
        for k in 0..n {
            for l in 0..n {
                assert_eq!(b[k][l], d[p.forward()[k]][q.forward()[l]]);
            }
        }
        let id = Permutation::identity(n);
        assert_eq!(a.permute(&id, &id), a);
    }

    #[test]
    fn pattern_hash_ignores_values() {
        let a = CscMatrix::identity(4);
        let b = a.with_values(vec![2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(a.pattern_hash(), b.pattern_hash());
        assert!(a.same_pattern(&b));
        assert_ne!(a.pattern_hash(), CscMatrix::zeros(4, 4).pattern_hash());
    }

    #[test]
    fn new_rejects_bad_structure() {
        assert!(CscMatrix::new(2, 2, vec![0, 1, 1], vec![0], vec![]).is_err());
        assert!(CscMatrix::new(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CscMatrix::new(2, 2, vec![1, 1, 1], vec![0], vec![1.0]).is_err());
    }
}
