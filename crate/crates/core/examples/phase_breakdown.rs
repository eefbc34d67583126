//! Where the time goes: solve a case, then rebuild the per-phase breakdown
//! from its JSON-lines log and render it as an SVG bar chart.
//!
//! ```text
//! cargo run --release --example phase_breakdown -- cases/case118.m
//! ```

use std::path::PathBuf;

use gridkkt::harness::{cmd_report, cmd_solve, read_log, Format, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case118.m").into()),
    );
    let out = std::env::temp_dir().join("gridkkt-phases");
    let cfg = RunConfig {
        out: Some(out.clone()),
        ..RunConfig::default()
    };
    let solved = cmd_solve(&case, &cfg)?;
    let log = out.join(format!("{}.iterations.jsonl", solved.report.case));

    let records = read_log(&log)?;
    let slowest = records
        .iter()
        .max_by_key(|r| r.phases_ns.factorization)
        .expect("non-empty log");
    println!(
        "{} iterations logged; costliest factorization at step {} (mu {:.1e}, fresh factorization: {})",
        records.len(),
        slowest.k,
        slowest.mu,
        slowest.refine.fresh_factorization
    );

    let breakdown = cmd_report(&log, Some(&out), Format::Csv)?;
    print!("{}", breakdown.table());
    println!("files in {}:", out.display());
    for f in std::fs::read_dir(&out)? {
        println!("  {}", f?.file_name().to_string_lossy());
    }
    Ok(())
}
