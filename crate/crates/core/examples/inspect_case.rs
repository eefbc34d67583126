//! Parse a MATPOWER case, report what the parser skipped, build the bus
//! admittance matrix and check that writing the case back out is lossless.
//!
//! ```text
//! cargo run --example inspect_case -- cases/case118.m
//! ```

use gridkkt::grid_model::{build_admittance, case_summary, parse_matpower, parse_matpower_with_report, to_matpower};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case30.m").into());
    let text = std::fs::read_to_string(&path)?;
    let (case, report) = parse_matpower_with_report(&text)?;
    let s = case_summary(&case);
    println!(
        "{}: {} buses, {} generators, {} branches, base {} MVA",
        case.name, s.n_bus, s.n_gen, s.n_branch, s.base_mva
    );
    for (block, cols) in &report.ignored_columns {
        println!("  ignored {block:?} columns {cols:?}");
    }
    println!(
        "  out of service: {} generators, {} branches",
        report.dropped_gens.len(),
        report.dropped_branches.len()
    );
    let limited = case.branches.iter().filter(|b| b.is_limited()).count();
    println!("  {limited} branches carry a flow limit");

    let y = build_admittance(&case)?;
    println!(
        "Ybus: {}x{} with {} stored entries; {} in-service branches",
        y.ybus.n(),
        y.ybus.n(),
        y.ybus.g.nnz(),
        y.branches.len()
    );
    let slack = case.slack_bus()?;
    let islands = y.unreachable_from(slack);
    println!("  buses unreachable from the slack bus: {islands:?}");
    let diag = (0..y.ybus.n()).map(|i| y.ybus.get(i, i).norm()).fold(0.0f64, f64::max);
    println!("  largest |Y_ii| = {diag:.3} p.u.");

    let again = parse_matpower(&to_matpower(&case))?;
    println!("round trip through MATPOWER text is exact: {}", again == case);
    Ok(())
}
