use super::{CscMatrix, SparseError};

const MAX_SWEEPS: usize = 64;

/// Row and column scalings `R`, `C` (powers of two) and the scaled matrix `R A C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibration {
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub scaled: CscMatrix,
    /// Whether every row and column max-magnitude landed in `[1/2, 2]`.
    pub converged: bool,
    pub sweeps: usize,
}

/// Iterative max-norm (Ruiz) scaling with factors rounded to powers of two.
pub fn equilibrate(a: &CscMatrix) -> Result<Equilibration, SparseError> {
    let (n_rows, n_cols) = (a.n_rows(), a.n_cols());
    let mut row_exp = vec![0i32; n_rows];
    let mut col_exp = vec![0i32; n_cols];
    let mut row_max = vec![0.0f64; n_rows];
    let mut col_max = vec![0.0f64; n_cols];
    let (ptr, idx, vals) = (a.col_ptr(), a.row_idx(), a.values());

    let mut converged = false;
    let mut sweeps = 0;
    loop {
        row_max.iter_mut().for_each(|m| *m = 0.0);
        for j in 0..n_cols {
            let mut cm = 0.0f64;
            for p in ptr[j]..ptr[j + 1] {
                let i = idx[p];
                let v = scaled_abs(vals[p], row_exp[i] + col_exp[j]);
                cm = cm.max(v);
                row_max[i] = row_max[i].max(v);
            }
            col_max[j] = cm;
        }
        if sweeps == 0 {
            if let Some(i) = row_max.iter().position(|&m| m == 0.0) {
                return Err(SparseError::ZeroRow { row: i });
            }
            if let Some(j) = col_max.iter().position(|&m| m == 0.0) {
                return Err(SparseError::ZeroColumn { col: j });
            }
        }
        let in_range = |m: &f64| (0.5..=2.0).contains(m);
        if row_max.iter().all(in_range) && col_max.iter().all(in_range) {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for (e, m) in row_exp.iter_mut().zip(&row_max) {
            *e -= half_log2(*m);
        }
        for (e, m) in col_exp.iter_mut().zip(&col_max) {
            *e -= half_log2(*m);
        }
    }

    let row_scale: Vec<f64> = row_exp.iter().map(|&e| pow2(e)).collect();
    let col_scale: Vec<f64> = col_exp.iter().map(|&e| pow2(e)).collect();
    let scaled = scale_values(a, &row_scale, &col_scale);
    Ok(Equilibration {
        row_scale,
        col_scale,
        scaled,
        converged,
        sweeps,
    })
}

/// `R A C` for given diagonal scalings.
pub fn scale_values(a: &CscMatrix, row_scale: &[f64], col_scale: &[f64]) -> CscMatrix {
    let mut out = a.clone();
    let ptr = a.col_ptr().to_vec();
    let idx = a.row_idx().to_vec();
    let vals = out.values_mut();
    for j in 0..a.n_cols() {
        for p in ptr[j]..ptr[j + 1] {
            vals[p] *= row_scale[idx[p]] * col_scale[j];
        }
    }
    out
}

fn scaled_abs(v: f64, e: i32) -> f64 {
    v.abs() * pow2(e)
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

fn half_log2(m: f64) -> i32 {
    (m.log2() / 2.0).round() as i32
}
