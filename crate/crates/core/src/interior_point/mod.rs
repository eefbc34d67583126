//! Primal barrier interior-point method.
//!
//! For fixed `μ` the driver applies Newton's method to the stationarity
//! conditions of `φ(y) = f(y) − μ Σ ln yᵢ` subject to `c(y) = 0`:
//!
//! ```text
//! r_y = ∇f(y) + Jᵀλ − μ Y⁻¹e = 0,   r_λ = c(y) = 0
//! ```
//!
//! Every Newton step solves `[[H + D_y, Jᵀ], [J, 0]] Δ = −(r_y, r_λ)` with
//! `D_y = μ Y⁻²`. All these matrices share one pattern, so the linear solver
//! can analyze the first and refactorize the rest. `μ` follows a monotone
//! schedule and steps are damped by the fraction-to-boundary rule only.

mod driver;
mod kkt;
mod problem;

use serde::{Deserialize, Serialize};

use crate::acopf_nlp::{NlpError, NlpOptions};
use crate::linear_solver::{SolveStats, SolverError, SolverOptions, Strategy};

pub use driver::{newton_step, solve_acopf, solve_acopf_observed, solve_problem, IpmObserver, IpmResult, NoObserver};
pub use kkt::{KktAssembler, KktSystem};
pub use problem::SlackProblem;

/// Schema tag carried by every serialized [`IterationRecord`].
pub const ITERATION_SCHEMA: &str = "gridkkt.iteration/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpmOptions {
    pub mu_init: f64,
    /// Factor applied to `μ` after each barrier subproblem.
    pub mu_shrink: f64,
    pub mu_min: f64,
    pub kkt_tol: f64,
    /// Inner loop exits once the scaled residual is at most `kappa · μ`.
    pub kappa: f64,
    pub max_outer: usize,
    /// Newton steps per barrier subproblem.
    pub max_inner: usize,
    /// Cap on the total number of Newton steps.
    pub max_iterations: usize,
    pub fraction_to_boundary: f64,
    /// Take the dual step with the primal step length (otherwise a full step).
    pub dual_step_follows_primal: bool,
    /// Starting values are clipped to at least this.
    pub min_start: f64,
    /// Diagonal shift used when a Newton system cannot be factored.
    pub regularization: f64,
    pub strategy: Strategy,
    pub solver: SolverOptions,
    pub nlp: NlpOptions,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            mu_init: 0.1,
            mu_shrink: 0.2,
            mu_min: 1e-9,
            kkt_tol: 1e-6,
            kappa: 10.0,
            max_outer: 50,
            max_inner: 30,
            max_iterations: 1500,
            fraction_to_boundary: 0.995,
            dual_step_follows_primal: true,
            min_start: 1e-2,
            regularization: 1e-8,
            strategy: Strategy::RefactorizeSequence,
            solver: SolverOptions::default(),
            nlp: NlpOptions::default(),
        }
    }
}

impl IpmOptions {
    pub fn validate(&self) -> Result<(), IpmError> {
        let bad = |what: &str| Err(IpmError::InvalidOptions(what.to_string()));
        if !(self.mu_shrink > 0.0 && self.mu_shrink < 1.0) {
            return bad("mu_shrink must lie in (0, 1)");
        }
        if !(self.fraction_to_boundary > 0.0 && self.fraction_to_boundary < 1.0) {
            return bad("fraction_to_boundary must lie in (0, 1)");
        }
        if !(self.mu_init > 0.0 && self.mu_min > 0.0 && self.kkt_tol > 0.0 && self.kappa > 0.0) {
            return bad("mu_init, mu_min, kkt_tol and kappa must be positive");
        }
        if !(self.min_start > 0.0) {
            return bad("min_start must be positive");
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.max_iterations == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpmState {
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: f64,
    /// Newton steps taken so far.
    pub iteration: usize,
    pub outer: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IpmStatus {
    Converged,
    IterLimit,
    LinearSolverFailure,
}

/// Wall time of one Newton iteration by category, in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub model_eval: u64,
    pub kkt_assembly: u64,
    pub factorization: u64,
    pub triangular_solve: u64,
    pub other: u64,
    pub total: u64,
}

impl PhaseTimes {
    pub fn accumulate(&mut self, other: &PhaseTimes) {
        self.model_eval += other.model_eval;
        self.kkt_assembly += other.kkt_assembly;
        self.factorization += other.factorization;
        self.triangular_solve += other.triangular_solve;
        self.other += other.other;
        self.total += other.total;
    }
}

/// Refinement outcome of one Newton system.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RefineRecord {
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub converged: bool,
    pub stagnated: bool,
    pub fallback: bool,
    pub fresh_factorization: bool,
}

impl From<&SolveStats> for RefineRecord {
    fn from(s: &SolveStats) -> Self {
        Self {
            iterations: s.iterations,
            initial_residual: s.initial_residual,
            final_residual: s.final_residual,
            converged: s.converged,
            stagnated: s.stagnated,
            fallback: s.fallback,
            fresh_factorization: s.fresh_factorization,
        }
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub schema: String,
    pub case: String,
    pub strategy: Strategy,
    /// 0-based Newton step index.
    pub k: usize,
    pub outer: usize,
    pub mu: f64,
    pub objective: f64,
    /// `‖r_y‖∞` before the step.
    pub r_y_inf: f64,
    /// `‖c(y)‖∞` before the step.
    pub r_lambda_inf: f64,
    /// `max(‖r_y‖∞ / (1 + ‖λ‖∞), ‖c‖∞)` before the step.
    pub kkt_error: f64,
    pub alpha_primal: f64,
    pub alpha_dual: f64,
    pub regularized: bool,
    pub refine: RefineRecord,
    pub phases_ns: PhaseTimes,
}

#[derive(Debug, thiserror::Error)]
pub enum IpmError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("barrier undefined: y[{index}] = {value} is not positive")]
    NonPositive { index: usize, value: f64 },
    #[error(transparent)]
    Nlp(#[from] NlpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// `φ(y) = f(y) − μ Σ ln yᵢ`.
pub fn barrier_value<P: SlackProblem>(problem: &P, y: &[f64], mu: f64) -> Result<f64, IpmError> {
    if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(IpmError::NonPositive { index, value });
    }
    let f = problem.objective(y)?;
    if mu == 0.0 {
        return Ok(f);
    }
    Ok(f - mu * y.iter().map(|v| v.ln()).sum::<f64>())
}

/// `(r_y, r_λ) = (∇f + Jᵀλ − μY⁻¹e, c(y))`.
pub fn first_order_residual<P: SlackProblem>(
    problem: &P,
    ws: &mut P::Workspace,
    state: &IpmState,
) -> Result<(Vec<f64>, Vec<f64>), IpmError> {
    let mut r_y = problem.gradient(&state.y)?;
    let jac = problem.jacobian(&state.y, ws)?;
    for (r, c, v) in jac.triplets() {
        r_y[c] += v * state.lambda[r];
    }
    for (r, y) in r_y.iter_mut().zip(&state.y) {
        *r -= state.mu / y;
    }
    Ok((r_y, problem.constraints(&state.y)?))
}

/// `max(‖r_y‖∞ / (1 + ‖λ‖∞), ‖r_λ‖∞)`
pub fn scaled_residual(r_y: &[f64], r_lambda: &[f64], lambda: &[f64]) -> f64 {
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (inf(r_y) / (1.0 + inf(lambda))).max(inf(r_lambda))
}

/// Fraction-to-boundary step: the largest `α ≤ 1` with `y + αΔy ≥ (1 − τ) y`.
/// The dual step equals the primal one.
pub fn step_lengths(y: &[f64], dy: &[f64], tau: f64) -> (f64, f64) {
    let alpha = y
        .iter()
        .zip(dy)
        .filter(|(_, d)| **d < 0.0)
        .map(|(yi, di)| tau * yi / -di)
        .fold(1.0f64, f64::min);
    (alpha, alpha)
}

/// Midpoint start with every component of `y` at least `min_start` and `λ = 0`.
pub fn initial_point<P: SlackProblem>(problem: &P, options: &IpmOptions) -> Result<IpmState, IpmError> {
    let y = problem
        .start()?
        .into_iter()
        .map(|v| {
            if v.is_finite() {
                v.max(options.min_start)
            } else {
                options.min_start
            }
        })
        .collect();
    Ok(IpmState {
        y,
        lambda: vec![0.0; problem.m()],
        mu: options.mu_init,
        iteration: 0,
        outer: 0,
    })
}
