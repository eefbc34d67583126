use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::grid_model::{case_summary, load_case};
use crate::interior_point::{
    solve_acopf_observed, IpmObserver, IpmOptions, IpmResult, IterationRecord, KktSystem, ITERATION_SCHEMA,
};
use crate::linear_solver::{SequenceSolver, SolverOptions, Strategy};
use crate::sparse_core::matrix_market::{load_coordinate, read_vector, save_coordinate, write_vector, Symmetry};
use crate::sparse_core::CscMatrix;

use super::report::{BenchmarkPair, Breakdown, RunReport};
use super::svg::{bar_chart, grouped_bar_chart};
use super::{to_csv, write_file, CsvRow, Format, HarnessError, REPLAY_SCHEMA, SUMMARY_SCHEMA};

/// Options shared by `solve` and `bench`.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub options: IpmOptions,
    /// Output directory; nothing is written when `None`.
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Write the first `dump_kkt` Newton systems as Matrix Market files.
    pub dump_kkt: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub report: RunReport,
    pub result: IpmResult,
    /// Every file written, in order.
    pub files: Vec<PathBuf>,
}

struct KktDumper {
    limit: usize,
    kkt_dir: PathBuf,
    rhs_dir: PathBuf,
    files: Vec<PathBuf>,
    error: Option<HarnessError>,
}

impl KktDumper {
    fn write(&mut self, k: usize, kkt: &KktSystem) -> Result<(), HarnessError> {
        let k_path = self.kkt_dir.join(format!("K_{k:05}.mtx"));
        save_coordinate(&k_path, &kkt.matrix, Symmetry::General).map_err(|e| HarnessError::io(&k_path, e))?;
        let b_path = self.rhs_dir.join(format!("b_{k:05}.mtx"));
        write_file(&b_path, &write_vector(&kkt.rhs))?;
        self.files.push(k_path);
        self.files.push(b_path);
        Ok(())
    }
}

impl IpmObserver for KktDumper {
    fn on_kkt(&mut self, k: usize, kkt: &KktSystem) {
        if k < self.limit && self.error.is_none() {
            if let Err(e) = self.write(k, kkt) {
                self.error = Some(e);
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

fn write_record<T: Serialize + CsvRow>(
    dir: &Path,
    stem: &str,
    format: Format,
    value: &T,
    files: &mut Vec<PathBuf>,
) -> Result<(), HarnessError> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let text = match format {
        Format::Json => to_json(value),
        Format::Csv => to_csv(std::slice::from_ref(value))?,
    };
    write_file(&path, &text)?;
    files.push(path);
    Ok(())
}

/// Solve one case. With an output directory this writes the JSON-lines
/// iteration log, the run report, a phase chart and the requested KKT dumps
/// (under `<out>/<case>/kkt` and `<out>/<case>/rhs`).
pub fn cmd_solve(case_path: &Path, cfg: &RunConfig) -> Result<SolveOutput, HarnessError> {
    if cfg.dump_kkt > 0 && cfg.out.is_none() {
        return Err(HarnessError::Usage("--dump-kkt needs --out".into()));
    }
    let case = load_case(case_path)?;
    let case_dir = cfg.out.as_ref().map(|o| o.join(&case.name));
    let mut dumper = KktDumper {
        limit: if case_dir.is_some() { cfg.dump_kkt } else { 0 },
        kkt_dir: case_dir.as_ref().map(|d| d.join("kkt")).unwrap_or_default(),
        rhs_dir: case_dir.as_ref().map(|d| d.join("rhs")).unwrap_or_default(),
        files: Vec::new(),
        error: None,
    };
    if dumper.limit > 0 {
        for dir in [&dumper.kkt_dir, &dumper.rhs_dir] {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
    }
    let result = solve_acopf_observed(&case, &cfg.options, &mut dumper)?;
    if let Some(e) = dumper.error {
        return Err(e);
    }
    let report = RunReport::from_result(&case.name, cfg.options.strategy, &result);
    let mut files = dumper.files;
    if let Some(out) = &cfg.out {
        let log_path = out.join(format!("{}.iterations.jsonl", case.name));
        let mut log = String::new();
        for r in &result.log {
            log.push_str(&serde_json::to_string(r).expect("records serialize"));
            log.push('\n');
        }
        write_file(&log_path, &log)?;
        files.push(log_path);
        write_record(out, &format!("{}.report", case.name), cfg.format, &report, &mut files)?;
        let svg_path = out.join(format!("{}.phases.svg", case.name));
        let title = format!("{}: share of solver time by phase", case.name);
        write_file(&svg_path, &bar_chart(&title, &report.phase_percent.rows(), "%"))?;
        files.push(svg_path);
    }
    Ok(SolveOutput { report, result, files })
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub run: RunConfig,
    /// Solves per strategy; the one with the least factorization time is kept.
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            run: RunConfig::default(),
            repeats: 1,
        }
    }
}

/// Solve the case with fresh factorization of every system, then with
/// refactorization, sequentially and with identical options otherwise.
pub fn cmd_bench(case_path: &Path, cfg: &BenchConfig) -> Result<BenchmarkPair, HarnessError> {
    let case = load_case(case_path)?;
    let run = |strategy: Strategy| -> Result<RunReport, HarnessError> {
        let options = IpmOptions {
            strategy,
            ..cfg.run.options.clone()
        };
        let mut best: Option<RunReport> = None;
        for _ in 0..cfg.repeats.max(1) {
            let r = solve_acopf_observed(&case, &options, &mut crate::interior_point::NoObserver)?;
            let report = RunReport::from_result(&case.name, strategy, &r);
            if best
                .as_ref()
                .is_none_or(|b| report.phases_ms.factorization < b.phases_ms.factorization)
            {
                best = Some(report);
            }
        }
        Ok(best.expect("at least one repeat"))
    };
    let baseline = run(Strategy::FactorizeEach)?;
    let candidate = run(Strategy::RefactorizeSequence)?;
    let pair = BenchmarkPair::new(baseline, candidate);
    if let Some(out) = &cfg.run.out {
        let mut files = Vec::new();
        write_record(out, &format!("{}.bench", case.name), cfg.run.format, &pair, &mut files)?;
        let groups = [
            (
                "factorization / it",
                [pair.baseline_avg_factorization_ms, pair.candidate_avg_factorization_ms],
            ),
            (
                "iteration",
                [pair.baseline.avg_iteration_ms, pair.candidate.avg_iteration_ms],
            ),
        ];
        let title = format!("{}: average time per iteration", case.name);
        let svg = grouped_bar_chart(&title, ["factorize each", "refactorize"], &groups, " ms");
        write_file(&out.join(format!("{}.bench.svg", case.name)), &svg)?;
    }
    Ok(pair)
}

/// Apply `f` to every path, on one thread per path when `parallel` is set.
/// Results come back in input order.
pub fn run_cases<T, F>(paths: &[PathBuf], parallel: bool, f: F) -> Vec<Result<T, HarnessError>>
where
    T: Send,
    F: Fn(&Path) -> Result<T, HarnessError> + Sync,
{
    if !parallel || paths.len() < 2 {
        return paths.iter().map(|p| f(p)).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = paths.iter().map(|p| scope.spawn(|| f(p))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("case worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayRow {
    pub index: usize,
    pub matrix: String,
    pub refine_iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub converged: bool,
    pub stagnated: bool,
    pub fallback: bool,
    pub fresh_factorization: bool,
    pub factor_ms: f64,
    pub solve_ms: f64,
    /// `‖x − x_fresh‖∞ / ‖x_fresh‖∞` against an independent pivoted factorization.
    pub fresh_rel_error: Option<f64>,
}

impl CsvRow for ReplayRow {
    fn headers() -> Vec<&'static str> {
        vec![
            "index",
            "matrix",
            "refine_iterations",
            "initial_residual",
            "final_residual",
            "converged",
            "stagnated",
            "fallback",
            "fresh_factorization",
            "factor_ms",
            "solve_ms",
            "fresh_rel_error",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            self.matrix.clone(),
            self.refine_iterations.to_string(),
            self.initial_residual.to_string(),
            self.final_residual.to_string(),
            self.converged.to_string(),
            self.stagnated.to_string(),
            self.fallback.to_string(),
            self.fresh_factorization.to_string(),
            self.factor_ms.to_string(),
            self.solve_ms.to_string(),
            self.fresh_rel_error.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub schema: String,
    pub strategy: Strategy,
    pub systems: usize,
    pub dim: usize,
    pub pattern: String,
    pub fallbacks: usize,
    pub fallback_systems: Vec<usize>,
    pub max_final_residual: f64,
    pub max_fresh_rel_error: Option<f64>,
    pub rows: Vec<ReplayRow>,
}

impl ReplayReport {
    pub fn table(&self) -> String {
        use std::fmt::Write as _;
        let mut s = format!(
            "{} systems of dimension {} [{}], {} fallback(s)\n",
            self.systems, self.dim, self.strategy, self.fallbacks
        );
        let _ = writeln!(
            s,
            "{:>5} {:<14} {:>6} {:>12} {:>12} {:>9} {:>12}",
            "k", "matrix", "refine", "raw resid", "final resid", "fallback", "vs fresh"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>5} {:<14} {:>6} {:>12.3e} {:>12.3e} {:>9} {:>12}",
                r.index,
                r.matrix,
                r.refine_iterations,
                r.initial_residual,
                r.final_residual,
                r.fallback,
                r.fresh_rel_error
                    .map(|v| format!("{v:.3e}"))
                    .unwrap_or_else(|| "-".into())
            );
        }
        s
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solve an in-memory sequence `(name, K, b)` with one strategy, optionally
/// comparing every solution with an independent fresh factorization.
pub fn replay_systems(
    systems: &[(String, CscMatrix, Vec<f64>)],
    strategy: Strategy,
    options: &SolverOptions,
    compare_fresh: bool,
) -> Result<ReplayReport, HarnessError> {
    let Some((_, first, _)) = systems.first() else {
        return Err(HarnessError::EmptySequence(PathBuf::new()));
    };
    let mut solver = SequenceSolver::new(strategy, options.clone());
    let mut rows = Vec::with_capacity(systems.len());
    for (index, (name, a, b)) in systems.iter().enumerate() {
        let (x, stats) = solver.solve_next(a, b)?;
        let fresh_rel_error = if compare_fresh {
            let (x_ref, _) = SequenceSolver::new(Strategy::FactorizeEach, options.clone()).solve_next(a, b)?;
            let diff: Vec<f64> = x.iter().zip(&x_ref).map(|(u, v)| u - v).collect();
            let scale = inf_norm(&x_ref);
            Some(if scale > 0.0 {
                inf_norm(&diff) / scale
            } else {
                inf_norm(&diff)
            })
        } else {
            None
        };
        rows.push(ReplayRow {
            index,
            matrix: name.clone(),
            refine_iterations: stats.iterations,
            initial_residual: stats.initial_residual,
            final_residual: stats.final_residual,
            converged: stats.converged,
            stagnated: stats.stagnated,
            fallback: stats.fallback,
            fresh_factorization: stats.fresh_factorization,
            factor_ms: stats.factor_ns as f64 / 1e6,
            solve_ms: stats.solve_ns as f64 / 1e6,
            fresh_rel_error,
        });
    }
    let seq = solver.stats();
    Ok(ReplayReport {
        schema: REPLAY_SCHEMA.to_string(),
        strategy,
        systems: rows.len(),
        dim: first.n_rows(),
        pattern: format!("{:016x}", first.pattern_hash()),
        fallbacks: seq.fallbacks,
        fallback_systems: seq.fallback_systems.clone(),
        max_final_residual: rows.iter().map(|r| r.final_residual).fold(0.0, f64::max),
        max_fresh_rel_error: compare_fresh.then(|| rows.iter().filter_map(|r| r.fresh_rel_error).fold(0.0, f64::max)),
        rows,
    })
}

fn mtx_files(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mtx"))
        .collect();
    if files.is_empty() {
        return Err(HarnessError::EmptySequence(dir.to_path_buf()));
    }
    files.sort();
    Ok(files)
}

/// Replay a dumped KKT sequence. Files are paired in name order; every
/// matrix must share the first one's sparsity pattern.
pub fn cmd_replay(
    matrix_dir: &Path,
    rhs_dir: &Path,
    strategy: Strategy,
    options: &SolverOptions,
    compare_fresh: bool,
) -> Result<ReplayReport, HarnessError> {
    let matrix_files = mtx_files(matrix_dir)?;
    let rhs_files = mtx_files(rhs_dir)?;
    if matrix_files.len() != rhs_files.len() {
        return Err(HarnessError::CountMismatch {
            matrices: matrix_files.len(),
            rhs: rhs_files.len(),
        });
    }
    let mut systems: Vec<(String, CscMatrix, Vec<f64>)> = Vec::with_capacity(matrix_files.len());
    for (mp, bp) in matrix_files.iter().zip(&rhs_files) {
        let a = load_coordinate(mp)?;
        if let Some((_, first, _)) = systems.first() {
            if !first.same_pattern(&a) {
                return Err(HarnessError::PatternMismatch {
                    file: mp.clone(),
                    first: matrix_files[0].clone(),
                });
            }
        }
        let text = fs::read_to_string(bp).map_err(|e| HarnessError::io(bp, e))?;
        let b = read_vector(&text)?;
        let name = mp
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        systems.push((name, a, b));
    }
    replay_systems(&systems, strategy, options, compare_fresh)
}

/// Parse a JSON-lines iteration log, checking each record's schema tag.
pub fn read_log(path: &Path) -> Result<Vec<IterationRecord>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: IterationRecord = serde_json::from_str(line).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        if rec.schema != ITERATION_SCHEMA {
            return Err(HarnessError::SchemaTag {
                path: path.to_path_buf(),
                line: i + 1,
                expected: ITERATION_SCHEMA,
                found: rec.schema,
            });
        }
        records.push(rec);
    }
    Ok(records)
}

/// Aggregate an iteration log into the phase breakdown; with an output
/// directory, also write it and a bar chart next to each other.
pub fn cmd_report(log_path: &Path, out: Option<&Path>, format: Format) -> Result<Breakdown, HarnessError> {
    let records = read_log(log_path)?;
    let breakdown = Breakdown::from_records(&records).ok_or_else(|| HarnessError::NoIterations(log_path.into()))?;
    if let Some(out) = out {
        let stem = log_path
            .file_name()
            .map(|n| {
                n.to_string_lossy()
                    .trim_end_matches(".jsonl")
                    .trim_end_matches(".iterations")
                    .to_string()
            })
            .unwrap_or_else(|| "log".into());
        let path = out.join(format!("{stem}.breakdown.{}", format.extension()));
        let text = match format {
            Format::Json => to_json(&breakdown),
            Format::Csv => breakdown.to_csv()?,
        };
        write_file(&path, &text)?;
        let title = format!("{}: computational cost by phase", breakdown.case);
        let svg = bar_chart(&title, &breakdown.phase_percent.rows(), "%");
        write_file(&out.join(format!("{stem}.breakdown.svg")), &svg)?;
    }
    Ok(breakdown)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub schema: String,
    pub case: String,
    pub n_bus: usize,
    pub n_gen: usize,
    pub n_branch: usize,
    pub base_mva: u64,
}

impl CsvRow for SummaryRecord {
    fn headers() -> Vec<&'static str> {
        vec!["case", "n_bus", "n_gen", "n_branch", "base_mva"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.case.clone(),
            self.n_bus.to_string(),
            self.n_gen.to_string(),
            self.n_branch.to_string(),
            self.base_mva.to_string(),
        ]
    }
}

pub fn cmd_summary(case_path: &Path) -> Result<SummaryRecord, HarnessError> {
    let case = load_case(case_path)?;
    let s = case_summary(&case);
    Ok(SummaryRecord {
        schema: SUMMARY_SCHEMA.to_string(),
        case: case.name,
        n_bus: s.n_bus,
        n_gen: s.n_gen,
        n_branch: s.n_branch,
        base_mva: s.base_mva,
    })
}
