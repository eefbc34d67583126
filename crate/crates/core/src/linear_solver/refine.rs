use serde::{Deserialize, Serialize};

use crate::sparse_core::CscMatrix;

use super::RefactorizationHandle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Target relative residual `‖b − Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)` of the
    /// equilibrated system that the factors actually represent.
    pub rtol: f64,
    pub max_iters: usize,
    /// A sweep that fails to shrink the residual below this ratio of the previous one ends the loop.
    pub stagnation_ratio: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            max_iters: 10,
            stagnation_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// Accepted residuals, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub stagnated: bool,
    /// Set when the result did not reach the target; the sequence driver
    /// answers it with a fresh pivoted factorization when it can.
    pub fallback: bool,
    pub fresh_factorization: bool,
    pub factor_ns: u64,
    pub solve_ns: u64,
}

pub fn relative_residual(a: &CscMatrix, a_norm: f64, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    (r.clone(), residual_ratio(&r, a_norm, x, b))
}

fn residual_ratio(r: &[f64], a_norm: f64, x: &[f64], b: &[f64]) -> f64 {
    let num = inf_norm(r);
    let den = a_norm * inf_norm(x) + inf_norm(b);
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Relative residual of the equilibrated system `(R A C) (C⁻¹x) = R b`.
///
/// For badly scaled matrices the unscaled ratio is dominated by a few huge
/// entries of `A` and can look tiny while the solution is poor, so the
/// refinement loop judges progress here instead.
fn scaled_residual(handle: &RefactorizationHandle, r: &[f64], x: &[f64], b: &[f64]) -> f64 {
    let (rs, cs) = (handle.row_scale(), handle.col_scale());
    let num = r.iter().zip(rs).fold(0.0f64, |m, (v, s)| m.max((v * s).abs()));
    let x_norm = x.iter().zip(cs).fold(0.0f64, |m, (v, s)| m.max((v / s).abs()));
    let b_norm = b.iter().zip(rs).fold(0.0f64, |m, (v, s)| m.max((v * s).abs()));
    let den = handle.scaled_norm() * x_norm + b_norm;
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn residual(handle: &RefactorizationHandle, a: &CscMatrix, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let res = scaled_residual(handle, &r, x, b);
    (r, res)
}

/// Classical iterative refinement with the existing factors. Residuals in
/// [`SolveStats`] are those of the equilibrated system.
pub fn refine(
    handle: &RefactorizationHandle,
    a: &CscMatrix,
    b: &[f64],
    x: Vec<f64>,
    options: &RefineOptions,
) -> (Vec<f64>, SolveStats) {
    let mut x = x;
    let (mut r, mut res) = residual(handle, a, &x, b);
    let mut stats = SolveStats {
        initial_residual: res,
        residual_history: vec![res],
        ..Default::default()
    };
    while res > options.rtol && stats.iterations < options.max_iters {
        let d = handle.triangular_solve(&r);
        let x_new: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + di).collect();
        let (r_new, res_new) = residual(handle, a, &x_new, b);
        stats.iterations += 1;
        let stalled = !(res_new <= options.stagnation_ratio * res);
        if res_new < res {
            x = x_new;
            r = r_new;
            res = res_new;
            stats.residual_history.push(res);
        }
        if stalled && res > options.rtol {
            stats.stagnated = true;
            break;
        }
    }
    stats.final_residual = res;
    stats.converged = res <= options.rtol;
    stats.fallback = !stats.converged;
    (x, stats)
}
