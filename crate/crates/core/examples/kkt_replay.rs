//! Dump every Newton system of a solve as Matrix Market files, then replay
//! the sequence with both strategies and compare against fresh factorizations.
//!
//! ```text
//! cargo run --release --example kkt_replay -- cases/case30.m /tmp/kkt
//! ```

use std::path::PathBuf;

use gridkkt::harness::{cmd_replay, cmd_solve, RunConfig};
use gridkkt::linear_solver::{SolverOptions, Strategy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let case = PathBuf::from(
        args.next()
            .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case30.m").into()),
    );
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("gridkkt-kkt-replay"));
    let cfg = RunConfig {
        out: Some(out.clone()),
        dump_kkt: usize::MAX,
        ..RunConfig::default()
    };
    let solved = cmd_solve(&case, &cfg)?;
    let name = &solved.report.case;
    println!(
        "{name}: {} systems of dimension {} written under {}",
        solved.report.iterations,
        solved.report.kkt_dim,
        out.join(name).display()
    );

    let (kkt, rhs) = (out.join(name).join("kkt"), out.join(name).join("rhs"));
    for strategy in [Strategy::FactorizeEach, Strategy::RefactorizeSequence] {
        let r = cmd_replay(&kkt, &rhs, strategy, &SolverOptions::default(), true)?;
        let factor_ms: f64 = r.rows.iter().map(|row| row.factor_ms).sum();
        println!(
            "{strategy:>12}: factorization {factor_ms:8.2} ms, max residual {:.2e}, max difference from fresh {:.2e}, \
             fallbacks at {:?}",
            r.max_final_residual,
            r.max_fresh_rel_error.unwrap_or(f64::NAN),
            r.fallback_systems
        );
    }
    Ok(())
}
