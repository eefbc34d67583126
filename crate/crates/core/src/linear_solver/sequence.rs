use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::sparse_core::{CscMatrix, Permutation};

use super::handle::{analyze_and_factorize, analyze_with_ordering};
use super::ordering::amd_order;
use super::refine::{refine, SolveStats};
use super::{RefactorizationHandle, SolverError, SolverOptions};

/// How a stream of same-pattern systems is factored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Pivoted factorization once, pivot-free refactorization afterwards.
    #[default]
    RefactorizeSequence,
    /// Pivoted numeric factorization for every system (ordering reused).
    FactorizeEach,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::RefactorizeSequence => "refactorize",
            Strategy::FactorizeEach => "factorize-each",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "refactorize" | "refactorize-sequence" => Ok(Strategy::RefactorizeSequence),
            "factorize-each" => Ok(Strategy::FactorizeEach),
            other => Err(format!(
                "unknown strategy '{other}' (expected refactorize or factorize-each)"
            )),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceStats {
    pub systems: usize,
    pub fallbacks: usize,
    pub fresh_factorizations: usize,
    pub refactorizations: usize,
    /// Index of every system that needed a fallback.
    pub fallback_systems: Vec<usize>,
}

/// Driver for a sequence `K_k x_k = b_k` of matrices sharing one pattern.
#[derive(Debug, Clone)]
pub struct SequenceSolver {
    strategy: Strategy,
    options: SolverOptions,
    handle: Option<RefactorizationHandle>,
    ordering: Option<Permutation>,
    stats: SequenceStats,
}

impl SequenceSolver {
    pub fn new(strategy: Strategy, options: SolverOptions) -> Self {
        Self {
            strategy,
            options,
            handle: None,
            ordering: None,
            stats: SequenceStats::default(),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn stats(&self) -> &SequenceStats {
        &self.stats
    }

    pub fn handle(&self) -> Option<&RefactorizationHandle> {
        self.handle.as_ref()
    }

    /// Factor (or refactor) `a`, solve, refine, and fall back to a fresh
    /// pivoted factorization if the frozen pivots prove inadequate.
    pub fn solve_next(&mut self, a: &CscMatrix, b: &[f64]) -> Result<(Vec<f64>, SolveStats), SolverError> {
        if b.len() != a.n_rows() {
            return Err(SolverError::DimensionMismatch {
                expected: a.n_rows(),
                found: b.len(),
            });
        }
        let index = self.stats.systems;
        let t0 = Instant::now();
        let mut refactored = false;
        match (self.strategy, self.handle.as_mut()) {
            (_, None) => {
                let h = analyze_and_factorize(a, &self.options)?;
                self.ordering = Some(h.symbolic().ordering.clone());
                self.handle = Some(h);
                self.stats.fresh_factorizations += 1;
            }
            (Strategy::RefactorizeSequence, Some(h)) => match h.refactorize(a) {
                Ok(_) => {
                    refactored = true;
                    self.stats.refactorizations += 1;
                }
                Err(SolverError::UnstablePivot { .. }) => {
                    self.fresh(a)?;
                    self.record_fallback(index);
                }
                Err(e) => return Err(e),
            },
            (Strategy::FactorizeEach, Some(h)) => {
                if !h.symbolic().matches(a) {
                    return Err(SolverError::PatternMismatch);
                }
                self.fresh(a)?;
            }
        }
        let mut factor_ns = t0.elapsed().as_nanos() as u64;

        let t1 = Instant::now();
        let handle = self.handle.as_ref().expect("factored above");
        let x0 = handle.triangular_solve(b);
        let (mut x, mut stats) = refine(handle, a, b, x0, &self.options.refine);
        let mut solve_ns = t1.elapsed().as_nanos() as u64;

        if refactored && stats.fallback {
            let t2 = Instant::now();
            self.fresh(a)?;
            self.record_fallback(index);
            factor_ns += t2.elapsed().as_nanos() as u64;
            let t3 = Instant::now();
            let handle = self.handle.as_ref().expect("factored above");
            let x0 = handle.triangular_solve(b);
            (x, stats) = refine(handle, a, b, x0, &self.options.refine);
            stats.fallback = true;
            solve_ns += t3.elapsed().as_nanos() as u64;
            refactored = false;
        } else if self.stats.fallback_systems.last() == Some(&index) {
            stats.fallback = true;
        }
        stats.fresh_factorization = !refactored;
        stats.factor_ns = factor_ns;
        stats.solve_ns = solve_ns;
        self.stats.systems += 1;
        Ok((x, stats))
    }

    fn fresh(&mut self, a: &CscMatrix) -> Result<(), SolverError> {
        let ordering = match &self.ordering {
            Some(o) => o.clone(),
            None => amd_order(a),
        };
        let h = analyze_with_ordering(a, ordering, &self.options)?;
        self.handle = Some(h);
        self.stats.fresh_factorizations += 1;
        Ok(())
    }

    fn record_fallback(&mut self, index: usize) {
        self.stats.fallbacks += 1;
        self.stats.fallback_systems.push(index);
    }
}

/// Per-system solutions and statistics.
pub type SequenceSolutions = Vec<(Vec<f64>, SolveStats)>;

/// Solve every system of the stream with one [`SequenceSolver`].
pub fn solve_sequence<'a, I>(
    systems: I,
    strategy: Strategy,
    options: &SolverOptions,
) -> Result<(SequenceSolutions, SequenceStats), SolverError>
where
    I: IntoIterator<Item = (&'a CscMatrix, &'a [f64])>,
{
    let mut solver = SequenceSolver::new(strategy, options.clone());
    let mut out = Vec::new();
    for (a, b) in systems {
        out.push(solver.solve_next(a, b)?);
    }
    if out.is_empty() {
        return Err(SolverError::EmptySequence);
    }
    Ok((out, solver.stats))
}
