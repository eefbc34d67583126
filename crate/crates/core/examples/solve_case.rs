//! Solve one MATPOWER case and print the iteration log.
//!
//! ```text
//! cargo run --release --example solve_case -- cases/case30.m
//! ```

use gridkkt::grid_model::load_case;
use gridkkt::interior_point::{solve_acopf_observed, IpmOptions, IterationRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case9.m").into());
    let case = load_case(&path)?;
    let options = IpmOptions::default();
    let mut print = |r: &IterationRecord| {
        println!(
            "{:4} {:3} mu={:8.1e} obj={:14.6} |ry|={:9.2e} |c|={:9.2e} E={:9.2e} a={:6.4} refine={} fb={}",
            r.k,
            r.outer,
            r.mu,
            r.objective,
            r.r_y_inf,
            r.r_lambda_inf,
            r.kkt_error,
            r.alpha_primal,
            r.refine.iterations,
            r.refine.fallback
        )
    };
    let result = solve_acopf_observed(&case, &options, &mut print)?;
    println!(
        "{}: {:?} after {} Newton steps, objective {:.6} $/h, violation {:.2e}, kkt {:.2e}",
        case.name, result.status, result.iterations, result.objective, result.constraint_violation, result.kkt_error
    );
    Ok(())
}
