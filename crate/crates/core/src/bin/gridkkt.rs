//! `gridkkt`: command-line front end over `gridkkt::harness`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gridkkt::harness::{
    cmd_bench, cmd_replay, cmd_report, cmd_solve, cmd_summary, run_cases, status_exit_code, to_csv, BenchConfig,
    CsvRow, Format, HarnessError, RunConfig,
};
use gridkkt::interior_point::IpmOptions;
use gridkkt::linear_solver::{SolverOptions, Strategy};

const USAGE_ERROR: u8 = 64;

#[derive(Parser)]
#[command(
    name = "gridkkt",
    version,
    about = "AC optimal power flow with refactorized KKT solves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve MATPOWER cases and write logs, reports and KKT dumps.
    Solve {
        #[arg(required = true)]
        cases: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        /// Dump the first N Newton systems as Matrix Market files (needs --out).
        #[arg(long, value_name = "N", default_value_t = 0)]
        dump_kkt: usize,
    },
    /// Solve each case with both strategies and compare factorization cost.
    Bench {
        #[arg(required = true)]
        cases: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        /// Solves per strategy; the fastest factorization total is kept.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Solve a dumped KKT sequence read from two directories of .mtx files.
    Replay {
        matrix_dir: PathBuf,
        rhs_dir: PathBuf,
        #[arg(long, default_value = "refactorize")]
        strategy: Strategy,
        #[arg(long)]
        freeze_scaling: bool,
        /// Also solve every system with a fresh factorization and report the difference.
        #[arg(long)]
        compare_fresh: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Phase breakdown of a JSON-lines iteration log, with an SVG chart under --out.
    Report {
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Bus, generator and branch counts of MATPOWER cases.
    Summary {
        #[arg(required = true)]
        cases: Vec<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "refactorize")]
    strategy: Strategy,
    #[arg(long)]
    mu_init: Option<f64>,
    /// Scaled KKT residual required at the final barrier level.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on the total number of Newton steps.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Reuse the first system's equilibration for the whole sequence.
    #[arg(long)]
    freeze_scaling: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable output on stdout (and in --out); tables otherwise.
    #[arg(long)]
    format: Option<Format>,
    /// Process distinct cases concurrently.
    #[arg(long)]
    parallel_cases: bool,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let mut options = IpmOptions {
            strategy: self.strategy,
            ..IpmOptions::default()
        };
        if let Some(mu) = self.mu_init {
            options.mu_init = mu;
        }
        if let Some(tol) = self.tol {
            options.kkt_tol = tol;
        }
        if let Some(n) = self.max_iter {
            options.max_iterations = n;
        }
        options.solver.freeze_scaling = self.freeze_scaling;
        RunConfig {
            options,
            out: self.out.clone(),
            format: self.format.unwrap_or_default(),
            dump_kkt: 0,
        }
    }
}

/// Print `value` in the requested format, or its table when none was asked for.
fn emit<T: Serialize + CsvRow>(
    value: &T,
    format: Option<Format>,
    table: impl FnOnce() -> String,
) -> Result<(), HarnessError> {
    match format {
        None => print!("{}", table()),
        Some(Format::Json) => println!("{}", serde_json::to_string(value).expect("records serialize")),
        Some(Format::Csv) => print!("{}", to_csv(std::slice::from_ref(value))?),
    }
    Ok(())
}

fn fail(e: &HarnessError) -> i32 {
    eprintln!("gridkkt: {e}");
    e.exit_code()
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve { cases, run, dump_kkt } => {
            let cfg = RunConfig {
                dump_kkt,
                ..run.config()
            };
            let results = run_cases(&cases, run.parallel_cases, |p| cmd_solve(p, &cfg));
            results
                .iter()
                .map(|r| match r {
                    Ok(out) => match emit(&out.report, run.format, || out.report.table()) {
                        Ok(()) => status_exit_code(out.report.status),
                        Err(e) => fail(&e),
                    },
                    Err(e) => fail(e),
                })
                .max()
                .unwrap_or(0)
        }
        Command::Bench { cases, run, repeats } => {
            let cfg = BenchConfig {
                run: run.config(),
                repeats,
            };
            let results = run_cases(&cases, run.parallel_cases, |p| cmd_bench(p, &cfg));
            results
                .iter()
                .map(|r| match r {
                    Ok(pair) => match emit(pair, run.format, || pair.table()) {
                        Ok(()) => status_exit_code(pair.baseline.status).max(status_exit_code(pair.candidate.status)),
                        Err(e) => fail(&e),
                    },
                    Err(e) => fail(e),
                })
                .max()
                .unwrap_or(0)
        }
        Command::Replay {
            matrix_dir,
            rhs_dir,
            strategy,
            freeze_scaling,
            compare_fresh,
            out,
            format,
        } => {
            let options = SolverOptions {
                freeze_scaling,
                ..SolverOptions::default()
            };
            let report = match cmd_replay(&matrix_dir, &rhs_dir, strategy, &options, compare_fresh) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let written = out.map(|dir| {
                let fmt = format.unwrap_or_default();
                let path = dir.join(format!("replay.{}", fmt.extension()));
                let text = match fmt {
                    Format::Json => Ok(serde_json::to_string_pretty(&report).expect("records serialize") + "\n"),
                    Format::Csv => to_csv(&report.rows),
                };
                text.and_then(|t| {
                    std::fs::create_dir_all(&dir)
                        .and_then(|_| std::fs::write(&path, t))
                        .map_err(|e| HarnessError::Io { path, source: e })
                })
            });
            if let Some(Err(e)) = written {
                return fail(&e);
            }
            match format {
                None => print!("{}", report.table()),
                Some(Format::Json) => println!("{}", serde_json::to_string(&report).expect("records serialize")),
                Some(Format::Csv) => match to_csv(&report.rows) {
                    Ok(t) => print!("{t}"),
                    Err(e) => return fail(&e),
                },
            }
            0
        }
        Command::Report { log, out, format } => match cmd_report(&log, out.as_deref(), format.unwrap_or_default()) {
            Ok(b) => {
                match format {
                    None => print!("{}", b.table()),
                    Some(Format::Json) => println!("{}", serde_json::to_string(&b).expect("records serialize")),
                    Some(Format::Csv) => match b.to_csv() {
                        Ok(t) => print!("{t}"),
                        Err(e) => return fail(&e),
                    },
                }
                0
            }
            Err(e) => fail(&e),
        },
        Command::Summary { cases, format } => {
            let mut code = 0;
            let mut rows = Vec::new();
            for p in &cases {
                match cmd_summary(p) {
                    Ok(s) => rows.push(s),
                    Err(e) => code = code.max(fail(&e)),
                }
            }
            match format {
                Some(Format::Csv) => match to_csv(&rows) {
                    Ok(t) => print!("{t}"),
                    Err(e) => code = code.max(fail(&e)),
                },
                Some(Format::Json) => {
                    for s in &rows {
                        println!("{}", serde_json::to_string(s).expect("records serialize"));
                    }
                }
                None => {
                    for s in &rows {
                        println!(
                            "{}: {} buses, {} generators, {} branches, base {} MVA",
                            s.case, s.n_bus, s.n_gen, s.n_branch, s.base_mva
                        );
                    }
                }
            }
            code
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    ExitCode::from(run(cli) as u8)
}
