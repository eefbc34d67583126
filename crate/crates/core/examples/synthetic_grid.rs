//! Build a larger network by tiling copies of a base case joined by tie
//! lines, save it as MATPOWER text, and solve it.
//!
//! ```text
//! cargo run --release --example synthetic_grid -- cases/case118.m 4
//! ```

use gridkkt::grid_model::{case_summary, load_case, tile_case, to_matpower, TileOptions};
use gridkkt::interior_point::{solve_acopf, IpmOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let base = load_case(
        args.next()
            .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case118.m").into()),
    )?;
    let copies = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let tiled = tile_case(
        &base,
        &TileOptions {
            copies,
            ..TileOptions::default()
        },
    )?;
    let s = case_summary(&tiled);
    let path = std::env::temp_dir().join(format!("{}.m", tiled.name));
    std::fs::write(&path, to_matpower(&tiled))?;
    println!(
        "{}: {} buses, {} generators, {} branches -> {}",
        tiled.name,
        s.n_bus,
        s.n_gen,
        s.n_branch,
        path.display()
    );

    let single = solve_acopf(&base, &IpmOptions::default())?;
    let r = solve_acopf(&tiled, &IpmOptions::default())?;
    println!(
        "KKT dimension {}, pattern hash {:016x}; {:?} after {} steps in {:.2} s",
        r.kkt_dim,
        r.kkt_pattern_hash,
        r.status,
        r.iterations,
        r.total_ns as f64 / 1e9
    );
    println!(
        "objective {:.2} vs {copies} x {:.2} = {:.2} for isolated copies",
        r.objective,
        single.objective,
        copies as f64 * single.objective
    );
    Ok(())
}
