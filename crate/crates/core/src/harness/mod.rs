//! Solve, benchmark, replay and report: the layer behind the `gridkkt` binary.
//!
//! Every JSON record written here carries a `schema` tag whose JSON Schema
//! document ships in the crate's `schema/` directory (see [`schema_files`]).

mod commands;
mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::grid_model::GridError;
use crate::interior_point::{IpmError, IpmStatus};
use crate::linear_solver::SolverError;
use crate::sparse_core::SparseError;

pub use commands::{
    cmd_bench, cmd_replay, cmd_report, cmd_solve, cmd_summary, read_log, replay_systems, run_cases, BenchConfig,
    ReplayReport, ReplayRow, RunConfig, SolveOutput, SummaryRecord,
};
pub use report::{BenchmarkPair, Breakdown, Phases, RunReport};
pub use svg::{bar_chart, grouped_bar_chart};

pub const RUN_REPORT_SCHEMA: &str = "gridkkt.run_report/1";
pub const BENCH_SCHEMA: &str = "gridkkt.bench/1";
pub const REPLAY_SCHEMA: &str = "gridkkt.replay/1";
pub const BREAKDOWN_SCHEMA: &str = "gridkkt.breakdown/1";
pub const SUMMARY_SCHEMA: &str = "gridkkt.case_summary/1";

/// The JSON Schema documents, one per record type.
pub mod schema_files {
    pub const ITERATION: &str = include_str!("../../schema/iteration.schema.json");
    pub const RUN_REPORT: &str = include_str!("../../schema/run_report.schema.json");
    pub const BENCH: &str = include_str!("../../schema/bench.schema.json");
    pub const REPLAY: &str = include_str!("../../schema/replay.schema.json");
    pub const BREAKDOWN: &str = include_str!("../../schema/breakdown.schema.json");
    pub const SUMMARY: &str = include_str!("../../schema/case_summary.schema.json");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Ipm(#[from] IpmError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: expected schema '{expected}', found '{found}'")]
    SchemaTag {
        path: PathBuf,
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("{0}: no iterations in log")]
    NoIterations(PathBuf),
    #[error("{0}: no .mtx files")]
    EmptySequence(PathBuf),
    #[error("{file}: sparsity pattern differs from {first}")]
    PatternMismatch { file: PathBuf, first: PathBuf },
    #[error("{matrices} matrices but {rhs} right-hand sides")]
    CountMismatch { matrices: usize, rhs: usize },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 64 for usage errors, 3 for linear-solver errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 64,
            HarnessError::Solver(_) | HarnessError::Ipm(IpmError::Solver(_)) => 3,
            _ => 1,
        }
    }
}

/// 0 converged, 2 iteration limit, 3 linear-solver failure.
pub fn status_exit_code(status: IpmStatus) -> i32 {
    match status {
        IpmStatus::Converged => 0,
        IpmStatus::IterLimit => 2,
        IpmStatus::LinearSolverFailure => 3,
    }
}

/// Types that can be written as one CSV row.
pub trait CsvRow {
    fn headers() -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
}

pub fn to_csv<T: CsvRow>(rows: &[T]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(T::headers())?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}
