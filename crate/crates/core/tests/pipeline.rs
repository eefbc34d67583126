//! End-to-end behaviour of the library: parse, solve, tile, round-trip.

mod common;

use gridkkt::grid_model::{case_summary, parse_matpower, tile_case, to_matpower, TileOptions};
use gridkkt::harness::{cmd_solve, RunConfig, RunReport};
use gridkkt::interior_point::{solve_acopf, IpmOptions, IpmStatus};
use gridkkt::linear_solver::Strategy;
use serde_json::Value;

use common::{mask_timing, rel_diff};

fn with_strategy(strategy: Strategy) -> IpmOptions {
    IpmOptions {
        strategy,
        ..IpmOptions::default()
    }
}

#[test]
fn strategies_reach_the_same_optimum() {
    for name in ["case9", "case30"] {
        let case = common::case(name);
        let a = solve_acopf(&case, &with_strategy(Strategy::RefactorizeSequence)).unwrap();
        let b = solve_acopf(&case, &with_strategy(Strategy::FactorizeEach)).unwrap();
        assert_eq!(a.status, IpmStatus::Converged);
        assert_eq!(b.status, IpmStatus::Converged);
        assert!((a.objective - b.objective).abs() <= 1e-6 * b.objective.abs(), "{name}");
        assert!(rel_diff(&a.x, &b.x) < 1e-6, "{name}: {}", rel_diff(&a.x, &b.x));
        assert_eq!(a.kkt_pattern_hash, b.kkt_pattern_hash);
        assert_eq!(b.sequence.refactorizations, 0);
        assert!(a.sequence.refactorizations > 0);
    }
}

#[test]
fn runs_are_deterministic_apart_from_timing() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            out: Some(dir.path().to_path_buf()),
            ..RunConfig::default()
        };
        cmd_solve(&common::case_path("case14"), &cfg).unwrap();
        let mut report: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("case14.report.json")).unwrap()).unwrap();
        mask_timing(&mut report);
        let log: Vec<Value> = std::fs::read_to_string(dir.path().join("case14.iterations.jsonl"))
            .unwrap()
            .lines()
            .map(|l| {
                let mut v: Value = serde_json::from_str(l).unwrap();
                mask_timing(&mut v);
                v
            })
            .collect();
        (report, log)
    };
    let (r1, l1) = run();
    let (r2, l2) = run();
    assert_eq!(r1, r2);
    assert_eq!(l1, l2);
}

#[test]
fn pattern_is_constant_over_the_run() {
    let case = common::case("case14");
    let mut hashes = Vec::new();
    let mut obs = CaptureHashes(&mut hashes);
    let r = gridkkt::interior_point::solve_acopf_observed(&case, &IpmOptions::default(), &mut obs).unwrap();
    assert_eq!(hashes.len(), r.iterations);
    assert!(hashes.iter().all(|&h| h == r.kkt_pattern_hash));
}

struct CaptureHashes<'a>(&'a mut Vec<u64>);

impl gridkkt::interior_point::IpmObserver for CaptureHashes<'_> {
    fn on_kkt(&mut self, _k: usize, kkt: &gridkkt::interior_point::KktSystem) {
        self.0.push(kkt.matrix.pattern_hash());
    }
}

#[test]
fn phase_times_partition_iteration_time() {
    let r = solve_acopf(&common::case("case30"), &IpmOptions::default()).unwrap();
    for rec in &r.log {
        let p = &rec.phases_ns;
        let parts = p.model_eval + p.kkt_assembly + p.factorization + p.triangular_solve + p.other;
        assert_eq!(parts, p.total, "iteration {}", rec.k);
    }
    let report = RunReport::from_result("case30", Strategy::RefactorizeSequence, &r);
    let pct = report.phase_percent;
    let sum = pct.factorization + pct.triangular_solve + pct.model_eval + pct.other;
    assert!((sum - 100.0).abs() < 1e-9);
    assert!((report.linear_solver_percent - pct.factorization - pct.triangular_solve).abs() < 1e-9);
}

#[test]
fn round_tripped_case_solves_identically() {
    let case = common::case("case30");
    let again = parse_matpower(&to_matpower(&case)).unwrap();
    assert_eq!(case_summary(&case), case_summary(&again));
    let a = solve_acopf(&case, &IpmOptions::default()).unwrap();
    let b = solve_acopf(&again, &IpmOptions::default()).unwrap();
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn tiled_copies_cost_the_sum_of_their_parts() {
    let base = common::case("case9");
    let single = solve_acopf(&base, &IpmOptions::default()).unwrap();
    let opts = TileOptions {
        copies: 3,
        ..TileOptions::default()
    };
    let tiled = tile_case(&base, &opts).unwrap();
    let s = case_summary(&tiled);
    assert_eq!((s.n_bus, s.n_gen), (27, 9));
    assert_eq!(s.n_branch, 27 + 2 * opts.ties_per_seam.min(9));
    let r = solve_acopf(&tiled, &IpmOptions::default()).unwrap();
    assert_eq!(r.status, IpmStatus::Converged);
    let expected = 3.0 * single.objective;
    assert!(
        (r.objective - expected).abs() < 1e-4 * expected,
        "{} vs {expected}",
        r.objective
    );
}

#[test]
fn frozen_scaling_still_converges() {
    let mut options = IpmOptions::default();
    options.solver.freeze_scaling = true;
    let r = solve_acopf(&common::case("case14"), &options).unwrap();
    assert_eq!(r.status, IpmStatus::Converged);
    let reference = solve_acopf(&common::case("case14"), &IpmOptions::default()).unwrap();
    assert!((r.objective - reference.objective).abs() < 1e-6 * reference.objective);
}
