//! Solve a case with fresh factorization of every KKT system and with
//! refactorization, and compare the per-iteration cost.
//!
//! ```text
//! cargo run --release --example compare_strategies -- cases/case118.m 3
//! ```

use std::path::PathBuf;

use gridkkt::harness::{cmd_bench, BenchConfig, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let case = PathBuf::from(
        args.next()
            .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case118.m").into()),
    );
    let repeats = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let out = std::env::temp_dir().join("gridkkt-bench");
    let cfg = BenchConfig {
        run: RunConfig {
            out: Some(out.clone()),
            ..RunConfig::default()
        },
        repeats,
    };
    let pair = cmd_bench(&case, &cfg)?;
    print!("{}", pair.table());
    println!("chart: {}", out.join(format!("{}.bench.svg", pair.case)).display());
    Ok(())
}
