use num_complex::Complex64;
use proptest::prelude::*;

use super::*;

const CASE9: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case9.m"));
const CASE14: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case14.m"));
const CASE30: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case30.m"));
const CASE118: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case118.m"));

fn two_bus(branch_status: u8, extra: &str) -> String {
    format!(
        "function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0   0  0 0 1 1 0 230 1 1.1 0.9;
  2 1 100 20 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 100 -100 1 100 1 200 0;
];
mpc.branch = [
  1 2 0 0.1 0 0 0 0 0 0 {branch_status} -360 360;
];
mpc.gencost = [
  2 0 0 3 0.01 40 0;
];
{extra}"
    )
}

#[test]
fn minimal_two_bus_case() {
    let case = parse_matpower(&two_bus(1, "")).unwrap();
    assert_eq!((case.buses.len(), case.gens.len(), case.branches.len()), (2, 1, 1));
    assert_eq!(case.name, "tiny");
    assert_eq!(case.buses[1].p_demand, 1.0);
    assert_eq!(case.buses[1].q_demand, 0.2);
    assert_eq!(
        case.gens[0].cost,
        CostPoly {
            c2: 0.01,
            c1: 40.0,
            c0: 0.0
        }
    );
    assert_eq!(case.branches[0].tap_ratio, 1.0);
    assert_eq!(case.slack_bus().unwrap(), 0);
}

#[test]
fn case9_counts_and_summary() {
    let case = parse_matpower(CASE9).unwrap();
    assert_eq!(
        case_summary(&case),
        CaseSummary {
            n_bus: 9,
            n_gen: 3,
            n_branch: 9,
            base_mva: 100
        }
    );
    assert_eq!(case.buses[4].p_demand, 0.9);
    assert_eq!(case.gens[1].p_max, 3.0);
    assert_eq!(
        case.gens[0].cost,
        CostPoly {
            c2: 0.11,
            c1: 5.0,
            c0: 150.0
        }
    );
}

#[test]
fn bundled_case_counts() {
    for (text, counts) in [(CASE14, (14, 5, 20)), (CASE30, (30, 6, 41)), (CASE118, (118, 54, 186))] {
        let s = case_summary(&parse_matpower(text).unwrap());
        assert_eq!((s.n_bus, s.n_gen, s.n_branch), counts);
    }
}

#[test]
fn report_lists_ignored_columns() {
    let (_, report) = parse_matpower_with_report(&two_bus(1, "")).unwrap();
    assert_eq!(report.ignored_columns[&MatrixBlock::Bus], vec![6, 10]);
    assert_eq!(report.ignored_columns[&MatrixBlock::Gen], vec![6]);
    assert_eq!(report.ignored_columns[&MatrixBlock::Branch], vec![6, 7, 11, 12]);
    assert_eq!(report.ignored_columns[&MatrixBlock::GenCost], vec![1, 2]);
}

#[test]
fn out_of_service_branch_is_dropped() {
    let (case, report) = parse_matpower_with_report(&two_bus(0, "")).unwrap();
    assert!(case.branches.is_empty());
    assert_eq!(report.dropped_branches, vec![0]);
    assert_eq!(case_summary(&case).n_branch, 0);
}

#[test]
fn rejects_unsupported_costs_and_missing_blocks() {
    let pwl = two_bus(1, "").replace("2 0 0 3 0.01 40 0;", "1 0 0 2 0 0 100 4000;");
    assert!(matches!(parse_matpower(&pwl), Err(GridError::UnsupportedCost { .. })));
    let cubic = two_bus(1, "").replace("2 0 0 3 0.01 40 0;", "2 0 0 4 1 0.01 40 0;");
    let err = parse_matpower(&cubic).unwrap_err();
    assert!(err.to_string().contains("degree 2"), "{err}");
    let reactive = two_bus(1, "").replace("2 0 0 3 0.01 40 0;", "2 0 0 3 0.01 40 0;\n 2 0 0 2 1 0;");
    assert!(matches!(
        parse_matpower(&reactive),
        Err(GridError::UnsupportedCost { .. })
    ));
    let no_branch = two_bus(1, "").replace("mpc.branch", "mpc.lines");
    assert!(matches!(parse_matpower(&no_branch), Err(GridError::MissingBlock(b)) if b == "branch"));
    let short = two_bus(1, "").replace("1 0 0 100 -100 1 100 1 200 0;", "1 0 0 100;");
    assert!(matches!(parse_matpower(&short), Err(GridError::MalformedRow { .. })));
    let junk = two_bus(1, "").replace("230 1 1.1 0.9;\n  2", "abc 1 1.1 0.9;\n  2");
    assert!(matches!(parse_matpower(&junk), Err(GridError::MalformedRow { .. })));
}

#[test]
fn rejects_invalid_records() {
    let bad_v = two_bus(1, "").replace("1 3 0   0  0 0 1 1 0 230 1 1.1 0.9", "1 3 0 0 0 0 1 1 0 230 1 0.9 1.1");
    assert!(matches!(parse_matpower(&bad_v), Err(GridError::InvalidBounds(_))));
    let zero_z = two_bus(1, "").replace("1 2 0 0.1", "1 2 0 0");
    assert!(matches!(parse_matpower(&zero_z), Err(GridError::ZeroImpedance { .. })));
    let orphan = two_bus(1, "").replace("1 0 0 100 -100", "7 0 0 100 -100");
    assert!(matches!(parse_matpower(&orphan), Err(GridError::UnknownBus { .. })));
    let dup = two_bus(1, "").replace("  2 1 100", "  1 1 100");
    assert!(matches!(parse_matpower(&dup), Err(GridError::DuplicateBus(_))));
}

#[test]
fn two_bus_admittance_by_hand() {
    let case = parse_matpower(&two_bus(1, "")).unwrap();
    let y = build_admittance(&case).unwrap().ybus.to_dense();
    let j10 = Complex64::new(0.0, 10.0);
    let want = [[-j10, j10], [j10, -j10]];
    for i in 0..2 {
        for k in 0..2 {
            assert!((y[i][k] - want[i][k]).norm() < 1e-14, "{i},{k}: {}", y[i][k]);
        }
    }
}

#[test]
fn out_of_service_branch_contributes_nothing() {
    let mut case = parse_matpower(&two_bus(1, "")).unwrap();
    case.buses[1].b_shunt = 0.5;
    case.branches[0].in_service = false;
    let adm = build_admittance(&case).unwrap();
    assert!(adm.branches.is_empty());
    let y = adm.ybus.to_dense();
    assert_eq!(y[0][0], Complex64::new(0.0, 0.0));
    assert_eq!(y[1][1], Complex64::new(0.0, 0.5));
    assert_eq!(y[0][1], Complex64::new(0.0, 0.0));
    assert_eq!(adm.unreachable_from(0), vec![1]);
}

#[test]
fn unit_transformer_equals_plain_line() {
    let mut case = parse_matpower(CASE9).unwrap();
    let plain = build_admittance(&case).unwrap();
    case.branches[3].tap_ratio = 1.0;
    case.branches[3].phase_shift = 0.0;
    assert_eq!(build_admittance(&case).unwrap(), plain);
}

#[test]
fn admittance_is_symmetric_without_phase_shifters() {
    for text in [CASE9, CASE14, CASE30, CASE118] {
        let case = parse_matpower(text).unwrap();
        assert!(case.branches.iter().all(|b| b.phase_shift == 0.0));
        let y = build_admittance(&case).unwrap().ybus;
        assert!(y.g.same_pattern(&y.g.transpose()));
        let (g, gt, b, bt) = (
            y.g.to_dense(),
            y.g.transpose().to_dense(),
            y.b.to_dense(),
            y.b.transpose().to_dense(),
        );
        assert_eq!(g, gt);
        assert_eq!(b, bt);
        // off-diagonal nonzero exactly where a branch connects two buses
        let adm = build_admittance(&case).unwrap();
        for (i, j, _) in y.g.triplets() {
            if i != j {
                assert!(adm
                    .branches
                    .iter()
                    .any(|br| (br.from, br.to) == (i, j) || (br.from, br.to) == (j, i)));
            }
        }
        assert!(adm.unreachable_from(case.slack_bus().unwrap()).is_empty());
    }
}

#[test]
fn row_sums_vanish_without_shunts() {
    // series-only network: every Ybus row sums to the bus shunt plus charging
    let case = parse_matpower(CASE30).unwrap();
    let adm = build_admittance(&case).unwrap();
    let y = adm.ybus.to_dense();
    for (i, row) in y.iter().enumerate() {
        let mut expected = adm.shunts[i];
        for br in &adm.branches {
            if br.from == i {
                expected += br.yff + br.yft;
            }
            if br.to == i {
                expected += br.ytt + br.ytf;
            }
        }
        let sum: Complex64 = row.iter().sum();
        assert!((sum - expected).norm() < 1e-9, "row {i}");
    }
}

#[test]
fn bundled_cases_round_trip() {
    for text in [CASE9, CASE14, CASE30, CASE118] {
        let case = parse_matpower(text).unwrap();
        let again = parse_matpower(&to_matpower(&case)).unwrap();
        assert_eq!(again, case);
    }
}

#[test]
fn tiling_offsets_ids_and_keeps_one_slack() {
    let base = parse_matpower(CASE9).unwrap();
    let big = tile_case(
        &base,
        &TileOptions {
            copies: 3,
            ties_per_seam: 2,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(big.buses.len(), 27);
    assert_eq!(big.gens.len(), 9);
    assert_eq!(big.branches.len(), 27 + 4);
    assert!(big.index_of(BusId(29)).is_some());
    assert_eq!(big.slack_bus().unwrap(), 0);
    let adm = build_admittance(&big).unwrap();
    assert!(adm.unreachable_from(0).is_empty());
}

#[test]
fn missing_file_reports_path() {
    let err = load_case("/nonexistent/case.m").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/case.m"));
}

fn phys() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        -500.0..500.0f64,
        (-5000i32..5000).prop_map(|v| v as f64 / 10.0)
    ]
}

prop_compose! {
    fn case_text()(
        base in prop_oneof![Just(100.0), Just(1000.0), 1.0..500.0f64],
        loads in prop::collection::vec((phys(), phys(), phys(), phys(), -60.0..60.0f64, 0.5..1.0f64), 2..8),
        gen in (phys(), phys(), 0.0..100.0f64, 100.0..900.0f64, 0.0..1.0f64, 0.0..50.0f64),
        line in (0.0..0.1f64, 0.01..0.5f64, 0.0..0.3f64, prop_oneof![Just(0.0), 10.0..900.0f64], prop_oneof![Just(0.0), 0.9..1.1f64], -10.0..10.0f64),
    ) -> String {
        let mut s = format!("function mpc = rnd\nmpc.baseMVA = {base:?};\nmpc.bus = [\n");
        for (k, (pd, qd, gs, bs, va, vmin)) in loads.iter().enumerate() {
            let ty = if k == 0 { 3 } else { 1 };
            s += &format!("{} {ty} {pd:?} {qd:?} {gs:?} {bs:?} 1 1.0 {va:?} 230 1 {:?} {vmin:?};\n", k + 1, vmin + 0.2);
        }
        let (pg, qg, pmin, pmax, c2, c1) = gen;
        s += &format!("];\nmpc.gen = [\n1 {pg:?} {qg:?} 300 -300 1 100 1 {pmax:?} {pmin:?};\n];\nmpc.branch = [\n");
        let (r, x, b, rate, tap, shift) = line;
        for k in 1..loads.len() {
            s += &format!("{k} {} {r:?} {x:?} {b:?} {rate:?} 0 0 {tap:?} {shift:?} 1 -360 360;\n", k + 1);
        }
        s += &format!("];\nmpc.gencost = [\n2 0 0 3 {c2:?} {c1:?} 0;\n];\n");
        s
    }
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(text in case_text()) {
        let case = parse_matpower(&text).unwrap();
        let again = parse_matpower(&to_matpower(&case)).unwrap();
        prop_assert_eq!(again, case);
    }

    #[test]
    fn per_unit_conversion_divides_by_base(pd in -1000.0..1000.0f64) {
        let text = two_bus(1, "").replace("2 1 100 20", &format!("2 1 {pd:?} 20"));
        let case = parse_matpower(&text).unwrap();
        prop_assert_eq!(case.buses[1].p_demand, pd / 100.0);
    }
}
