use std::time::Instant;

use crate::acopf_nlp::{assemble_nlp, to_compact};
use crate::grid_model::GridCase;
use crate::linear_solver::{SequenceSolver, SequenceStats, SolveStats, SolverError};
use crate::sparse_core::CscMatrix;

use super::{
    initial_point, scaled_residual, step_lengths, IpmError, IpmOptions, IpmState, IpmStatus, IterationRecord,
    KktAssembler, KktSystem, PhaseTimes, RefineRecord, SlackProblem, ITERATION_SCHEMA,
};

/// Hooks called by the driver; both default to no-ops.
pub trait IpmObserver {
    /// Called with every Newton system before it is solved.
    fn on_kkt(&mut self, _k: usize, _kkt: &KktSystem) {}
    fn on_iteration(&mut self, _record: &IterationRecord) {}
}

pub struct NoObserver;

impl IpmObserver for NoObserver {}

impl<F: FnMut(&IterationRecord)> IpmObserver for F {
    fn on_iteration(&mut self, record: &IterationRecord) {
        self(record)
    }
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub status: IpmStatus,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Original variables; empty for problems without a network.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Newton steps.
    pub iterations: usize,
    pub outer_iterations: usize,
    pub final_mu: f64,
    /// Scaled residual of the returned iterate at `final_mu`.
    pub kkt_error: f64,
    /// `‖c(y)‖∞`, or the violation of the original constraints for network problems.
    pub constraint_violation: f64,
    pub log: Vec<IterationRecord>,
    pub sequence: SequenceStats,
    pub kkt_pattern_hash: u64,
    pub kkt_dim: usize,
    /// Whole run, including setup and the final residual evaluation.
    pub total_ns: u64,
}

impl IpmResult {
    pub fn phase_totals(&self) -> PhaseTimes {
        let mut t = PhaseTimes::default();
        for r in &self.log {
            t.accumulate(&r.phases_ns);
        }
        t
    }
}

fn ns(t: Instant) -> u64 {
    t.elapsed().as_nanos() as u64
}

fn residual_from(grad: Vec<f64>, jac: &CscMatrix, constraints: Vec<f64>, state: &IpmState) -> (Vec<f64>, Vec<f64>) {
    let mut r_y = grad;
    for (r, c, v) in jac.triplets() {
        r_y[c] += v * state.lambda[r];
    }
    for (r, y) in r_y.iter_mut().zip(&state.y) {
        *r -= state.mu / y;
    }
    (r_y, constraints)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solve one Newton system and split the result into `(Δy, Δλ)`.
pub fn newton_step(
    kkt: &KktSystem,
    solver: &mut SequenceSolver,
) -> Result<(Vec<f64>, Vec<f64>, SolveStats), SolverError> {
    let (mut dx, stats) = solver.solve_next(&kkt.matrix, &kkt.rhs)?;
    let dl = dx.split_off(kkt.n);
    Ok((dx, dl, stats))
}

/// Run the barrier method on any [`SlackProblem`].
pub fn solve_problem<P: SlackProblem>(
    problem: &P,
    options: &IpmOptions,
    name: &str,
    observer: &mut dyn IpmObserver,
) -> Result<IpmResult, IpmError> {
    let t_run = Instant::now();
    options.validate()?;
    let mut ws = problem.workspace();
    let assembler = KktAssembler::new(problem.jac_pattern(), problem.hess_pattern());
    let mut solver = SequenceSolver::new(options.strategy, options.solver.clone());
    let mut state = initial_point(problem, options)?;
    let mut log = Vec::new();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut last_error;
    let status = 'run: loop {
        state.outer += 1;
        let last_level = state.mu <= options.mu_min;
        let target = if last_level {
            options.kkt_tol.min(options.kappa * state.mu)
        } else {
            options.kappa * state.mu
        };
        let mut inner = 0;
        loop {
            let t_iter = Instant::now();
            let grad = problem.gradient(&state.y)?;
            let jac = problem.jacobian(&state.y, &mut ws)?.clone();
            let c = problem.constraints(&state.y)?;
            let (r_y, r_lambda) = residual_from(grad, &jac, c, &state);
            let error = scaled_residual(&r_y, &r_lambda, &state.lambda);
            last_error = error;
            if best.as_ref().is_none_or(|(e, _, _)| error <= *e) {
                best = Some((error, state.y.clone(), state.lambda.clone()));
            }
            if error <= target || inner >= options.max_inner {
                break;
            }
            if state.iteration >= options.max_iterations {
                break 'run IpmStatus::IterLimit;
            }
            let objective = problem.objective(&state.y)?;
            let hess = problem.hessian(&state.y, &state.lambda, &mut ws)?;
            let model_eval = ns(t_iter);

            let t_asm = Instant::now();
            let mut kkt = assembler.assemble(hess, &jac, &state.y, state.mu, 0.0, &r_y, &r_lambda);
            let mut kkt_assembly = ns(t_asm);
            // observer work (e.g. dumping files) is not solver time
            let t_obs = Instant::now();
            observer.on_kkt(state.iteration, &kkt);
            let observer_ns = ns(t_obs);

            let mut regularized = false;
            let step = match newton_step(&kkt, &mut solver) {
                Ok(s) => Ok(s),
                Err(SolverError::PatternMismatch) => Err(SolverError::PatternMismatch),
                Err(_) => {
                    regularized = true;
                    let t_asm = Instant::now();
                    let hess = problem.hessian(&state.y, &state.lambda, &mut ws)?;
                    kkt = assembler.assemble(hess, &jac, &state.y, state.mu, options.regularization, &r_y, &r_lambda);
                    kkt_assembly += ns(t_asm);
                    newton_step(&kkt, &mut solver)
                }
            };
            let (dy, dl, stats) = match step {
                Ok(s) if s.0.iter().chain(&s.1).all(|v| v.is_finite()) => s,
                _ => break 'run IpmStatus::LinearSolverFailure,
            };

            let (alpha_p, alpha_d) = step_lengths(&state.y, &dy, options.fraction_to_boundary);
            let alpha_d = if options.dual_step_follows_primal { alpha_d } else { 1.0 };
            for (y, d) in state.y.iter_mut().zip(&dy) {
                *y += alpha_p * d;
            }
            for (l, d) in state.lambda.iter_mut().zip(&dl) {
                *l += alpha_d * d;
            }

            let total = ns(t_iter).saturating_sub(observer_ns);
            let accounted = model_eval + kkt_assembly + stats.factor_ns + stats.solve_ns;
            let record = IterationRecord {
                schema: ITERATION_SCHEMA.to_string(),
                case: name.to_string(),
                strategy: options.strategy,
                k: state.iteration,
                outer: state.outer,
                mu: state.mu,
                objective,
                r_y_inf: inf_norm(&r_y),
                r_lambda_inf: inf_norm(&r_lambda),
                kkt_error: error,
                alpha_primal: alpha_p,
                alpha_dual: alpha_d,
                regularized,
                refine: RefineRecord::from(&stats),
                phases_ns: PhaseTimes {
                    model_eval,
                    kkt_assembly,
                    factorization: stats.factor_ns,
                    triangular_solve: stats.solve_ns,
                    other: total.saturating_sub(accounted),
                    total: total.max(accounted),
                },
            };
            observer.on_iteration(&record);
            log.push(record);
            state.iteration += 1;
            inner += 1;
        }
        if last_level {
            break if last_error <= options.kkt_tol {
                IpmStatus::Converged
            } else {
                IpmStatus::IterLimit
            };
        }
        if state.outer >= options.max_outer {
            break IpmStatus::IterLimit;
        }
        state.mu = (options.mu_shrink * state.mu).max(options.mu_min);
    };

    let (y, lambda, kkt_error) = match (status, best) {
        (IpmStatus::Converged, _) | (_, None) => (state.y.clone(), state.lambda.clone(), last_error),
        (_, Some((e, y, l))) => (y, l, e),
    };
    let objective = problem.objective(&y)?;
    let violation = inf_norm(&problem.constraints(&y)?);
    Ok(IpmResult {
        status,
        objective,
        constraint_violation: violation,
        y,
        lambda,
        x: Vec::new(),
        iterations: state.iteration,
        outer_iterations: state.outer,
        final_mu: state.mu,
        kkt_error,
        log,
        sequence: solver.stats().clone(),
        kkt_pattern_hash: assembler.pattern().pattern_hash(),
        kkt_dim: assembler.dim(),
        total_ns: ns(t_run),
    })
}

/// Solve the optimal power flow problem of `case`.
pub fn solve_acopf(case: &GridCase, options: &IpmOptions) -> Result<IpmResult, IpmError> {
    solve_acopf_observed(case, options, &mut NoObserver)
}

pub fn solve_acopf_observed(
    case: &GridCase,
    options: &IpmOptions,
    observer: &mut dyn IpmObserver,
) -> Result<IpmResult, IpmError> {
    let t0 = Instant::now();
    let nlp = to_compact(assemble_nlp(case, &options.nlp)?)?;
    let setup = ns(t0);
    let mut result = solve_problem(&nlp, options, &case.name, observer)?;
    result.x = nlp.x_of(&result.y)?;
    result.constraint_violation = nlp.original().constraint_violation(&result.x)?;
    result.total_ns += setup;
    Ok(result)
}
