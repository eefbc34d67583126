use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::interior_point::{IpmResult, IpmStatus, IterationRecord, PhaseTimes};
use crate::linear_solver::Strategy;

use super::{CsvRow, BENCH_SCHEMA, BREAKDOWN_SCHEMA, RUN_REPORT_SCHEMA};

const NS_PER_MS: f64 = 1e6;

/// One value per reported phase. Used both for milliseconds and percentages.
///
/// KKT assembly is not a phase of its own and is folded into `other`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Phases {
    pub factorization: f64,
    pub triangular_solve: f64,
    pub model_eval: f64,
    pub other: f64,
}

impl Phases {
    pub fn from_times(t: &PhaseTimes) -> Self {
        let ms = |ns: u64| ns as f64 / NS_PER_MS;
        Self {
            factorization: ms(t.factorization),
            triangular_solve: ms(t.triangular_solve),
            model_eval: ms(t.model_eval),
            other: ms(t.kkt_assembly + t.other),
        }
    }

    pub fn sum(&self) -> f64 {
        self.factorization + self.triangular_solve + self.model_eval + self.other
    }

    /// Shares of [`Phases::sum`] in percent; all zero when nothing was timed.
    pub fn percentages(&self) -> Phases {
        let total = self.sum();
        if total <= 0.0 {
            return Phases::default();
        }
        let pct = |v: f64| 100.0 * v / total;
        Phases {
            factorization: pct(self.factorization),
            triangular_solve: pct(self.triangular_solve),
            model_eval: pct(self.model_eval),
            other: pct(self.other),
        }
    }

    /// Factorization plus triangular solve.
    pub fn linear_solver(&self) -> f64 {
        self.factorization + self.triangular_solve
    }

    pub fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("factorization", self.factorization),
            ("triangular solve", self.triangular_solve),
            ("model evaluation", self.model_eval),
            ("other", self.other),
        ]
    }
}

fn phase_table(ms: &Phases, pct: &Phases) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<18} {:>12} {:>8}", "phase", "time [ms]", "share");
    for ((name, t), (_, p)) in ms.rows().iter().zip(pct.rows()) {
        let _ = writeln!(s, "{name:<18} {t:>12.3} {p:>7.1}%");
    }
    let _ = writeln!(s, "{:<18} {:>12.3} {:>7.1}%", "total", ms.sum(), pct.sum());
    let _ = writeln!(
        s,
        "linear solver share (factorization + triangular solve): {:.1}%",
        pct.linear_solver()
    );
    s
}

/// Outcome and cost profile of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub case: String,
    pub strategy: Strategy,
    pub status: IpmStatus,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub objective: f64,
    pub constraint_violation: f64,
    pub kkt_error: f64,
    /// Wall time of the whole solve, setup included.
    pub total_s: f64,
    pub phases_ms: Phases,
    pub phase_percent: Phases,
    pub linear_solver_percent: f64,
    /// Analysis plus numeric factorization of the first system.
    pub first_factorization_ms: f64,
    /// Factorization phase per Newton step, the first factorization included.
    pub avg_factorization_ms: f64,
    pub avg_iteration_ms: f64,
    pub fresh_factorizations: usize,
    pub refactorizations: usize,
    pub fallbacks: usize,
    pub kkt_dim: usize,
    /// Hex digest of the KKT sparsity pattern.
    pub kkt_pattern: String,
}

impl RunReport {
    pub fn from_result(case: &str, strategy: Strategy, r: &IpmResult) -> Self {
        let phases_ms = Phases::from_times(&r.phase_totals());
        let phase_percent = phases_ms.percentages();
        let per_iter = |v: f64| {
            if r.iterations == 0 {
                0.0
            } else {
                v / r.iterations as f64
            }
        };
        Self {
            schema: RUN_REPORT_SCHEMA.to_string(),
            case: case.to_string(),
            strategy,
            status: r.status,
            iterations: r.iterations,
            outer_iterations: r.outer_iterations,
            objective: r.objective,
            constraint_violation: r.constraint_violation,
            kkt_error: r.kkt_error,
            total_s: r.total_ns as f64 / 1e9,
            linear_solver_percent: phase_percent.linear_solver(),
            first_factorization_ms: r
                .log
                .first()
                .map_or(0.0, |rec| rec.phases_ns.factorization as f64 / NS_PER_MS),
            avg_factorization_ms: per_iter(phases_ms.factorization),
            avg_iteration_ms: per_iter(phases_ms.sum()),
            phases_ms,
            phase_percent,
            fresh_factorizations: r.sequence.fresh_factorizations,
            refactorizations: r.sequence.refactorizations,
            fallbacks: r.sequence.fallbacks,
            kkt_dim: r.kkt_dim,
            kkt_pattern: format!("{:016x}", r.kkt_pattern_hash),
        }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} [{}]: {:?} after {} Newton steps ({} barrier levels), objective {:.6}, violation {:.2e}, {:.3} s",
            self.case,
            self.strategy,
            self.status,
            self.iterations,
            self.outer_iterations,
            self.objective,
            self.constraint_violation,
            self.total_s
        );
        s.push_str(&phase_table(&self.phases_ms, &self.phase_percent));
        s
    }
}

impl CsvRow for RunReport {
    fn headers() -> Vec<&'static str> {
        vec![
            "case",
            "strategy",
            "status",
            "iterations",
            "outer_iterations",
            "objective",
            "constraint_violation",
            "kkt_error",
            "total_s",
            "factorization_ms",
            "triangular_solve_ms",
            "model_eval_ms",
            "other_ms",
            "factorization_pct",
            "triangular_solve_pct",
            "model_eval_pct",
            "other_pct",
            "linear_solver_pct",
            "first_factorization_ms",
            "avg_factorization_ms",
            "avg_iteration_ms",
            "fresh_factorizations",
            "refactorizations",
            "fallbacks",
            "kkt_dim",
            "kkt_pattern",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let status = serde_json::to_value(self.status).expect("status serializes");
        vec![
            self.case.clone(),
            self.strategy.to_string(),
            status.as_str().unwrap_or_default().to_string(),
            self.iterations.to_string(),
            self.outer_iterations.to_string(),
            self.objective.to_string(),
            self.constraint_violation.to_string(),
            self.kkt_error.to_string(),
            self.total_s.to_string(),
            self.phases_ms.factorization.to_string(),
            self.phases_ms.triangular_solve.to_string(),
            self.phases_ms.model_eval.to_string(),
            self.phases_ms.other.to_string(),
            self.phase_percent.factorization.to_string(),
            self.phase_percent.triangular_solve.to_string(),
            self.phase_percent.model_eval.to_string(),
            self.phase_percent.other.to_string(),
            self.linear_solver_percent.to_string(),
            self.first_factorization_ms.to_string(),
            self.avg_factorization_ms.to_string(),
            self.avg_iteration_ms.to_string(),
            self.fresh_factorizations.to_string(),
            self.refactorizations.to_string(),
            self.fallbacks.to_string(),
            self.kkt_dim.to_string(),
            self.kkt_pattern.clone(),
        ]
    }
}

/// The same case solved with both strategies and otherwise equal options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPair {
    pub schema: String,
    pub case: String,
    /// Fresh pivoted factorization of every system.
    pub baseline: RunReport,
    /// One analysis, then refactorization.
    pub candidate: RunReport,
    pub baseline_avg_factorization_ms: f64,
    pub candidate_avg_factorization_ms: f64,
    /// Baseline over candidate average factorization time per iteration.
    pub factorization_speedup: f64,
    /// Baseline over candidate total wall time.
    pub total_speedup: f64,
}

impl BenchmarkPair {
    pub fn new(baseline: RunReport, candidate: RunReport) -> Self {
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
        Self {
            schema: BENCH_SCHEMA.to_string(),
            case: candidate.case.clone(),
            baseline_avg_factorization_ms: baseline.avg_factorization_ms,
            candidate_avg_factorization_ms: candidate.avg_factorization_ms,
            factorization_speedup: ratio(baseline.avg_factorization_ms, candidate.avg_factorization_ms),
            total_speedup: ratio(baseline.total_s, candidate.total_s),
            baseline,
            candidate,
        }
    }

    /// Whether refactorization was no slower per iteration than fresh factorization.
    pub fn candidate_not_slower(&self) -> bool {
        self.candidate_avg_factorization_ms <= self.baseline_avg_factorization_ms
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} (KKT dimension {})", self.case, self.candidate.kkt_dim);
        let _ = writeln!(
            s,
            "{:<16} {:>6} {:>14} {:>16} {:>14} {:>10}",
            "strategy", "iters", "first fact [ms]", "avg fact/it [ms]", "avg it [ms]", "total [s]"
        );
        for r in [&self.baseline, &self.candidate] {
            let _ = writeln!(
                s,
                "{:<16} {:>6} {:>14.3} {:>16.4} {:>14.4} {:>10.3}",
                r.strategy.to_string(),
                r.iterations,
                r.first_factorization_ms,
                r.avg_factorization_ms,
                r.avg_iteration_ms,
                r.total_s
            );
        }
        let _ = writeln!(
            s,
            "factorization speedup {:.3}x, total speedup {:.3}x",
            self.factorization_speedup, self.total_speedup
        );
        s
    }
}

impl CsvRow for BenchmarkPair {
    fn headers() -> Vec<&'static str> {
        vec![
            "case",
            "kkt_dim",
            "baseline_iterations",
            "candidate_iterations",
            "baseline_first_factorization_ms",
            "candidate_first_factorization_ms",
            "baseline_avg_factorization_ms",
            "candidate_avg_factorization_ms",
            "factorization_speedup",
            "baseline_total_s",
            "candidate_total_s",
            "total_speedup",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.case.clone(),
            self.candidate.kkt_dim.to_string(),
            self.baseline.iterations.to_string(),
            self.candidate.iterations.to_string(),
            self.baseline.first_factorization_ms.to_string(),
            self.candidate.first_factorization_ms.to_string(),
            self.baseline_avg_factorization_ms.to_string(),
            self.candidate_avg_factorization_ms.to_string(),
            self.factorization_speedup.to_string(),
            self.baseline.total_s.to_string(),
            self.candidate.total_s.to_string(),
            self.total_speedup.to_string(),
        ]
    }
}

/// Phase profile aggregated from an iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub schema: String,
    pub case: String,
    pub iterations: usize,
    pub phases_ms: Phases,
    pub phase_percent: Phases,
    pub linear_solver_percent: f64,
}

impl Breakdown {
    /// `None` for an empty log.
    pub fn from_records(records: &[IterationRecord]) -> Option<Self> {
        let first = records.first()?;
        let mut t = PhaseTimes::default();
        for r in records {
            t.accumulate(&r.phases_ns);
        }
        let phases_ms = Phases::from_times(&t);
        let phase_percent = phases_ms.percentages();
        Some(Self {
            schema: BREAKDOWN_SCHEMA.to_string(),
            case: first.case.clone(),
            iterations: records.len(),
            linear_solver_percent: phase_percent.linear_solver(),
            phases_ms,
            phase_percent,
        })
    }

    pub fn table(&self) -> String {
        let mut s = format!("{}: {} iterations\n", self.case, self.iterations);
        s.push_str(&phase_table(&self.phases_ms, &self.phase_percent));
        s
    }
}

impl Breakdown {
    /// Long-format CSV: one row per phase plus a total.
    pub fn to_csv(&self) -> Result<String, super::HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["case", "iterations", "phase", "time_ms", "percent"])?;
        for ((name, t), (_, p)) in self.phases_ms.rows().iter().zip(self.phase_percent.rows()) {
            w.write_record([
                self.case.clone(),
                self.iterations.to_string(),
                name.to_string(),
                t.to_string(),
                p.to_string(),
            ])?;
        }
        w.write_record([
            self.case.clone(),
            self.iterations.to_string(),
            "total".to_string(),
            self.phases_ms.sum().to_string(),
            self.phase_percent.sum().to_string(),
        ])?;
        let bytes = w
            .into_inner()
            .map_err(|e| super::HarnessError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
