use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BranchRecord, BusId, BusRecord, BusType, CostPoly, GenRecord, GridCase, GridError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixBlock {
    Bus,
    Gen,
    Branch,
    GenCost,
}

impl MatrixBlock {
    fn name(self) -> &'static str {
        match self {
            MatrixBlock::Bus => "bus",
            MatrixBlock::Gen => "gen",
            MatrixBlock::Branch => "branch",
            MatrixBlock::GenCost => "gencost",
        }
    }

    fn min_cols(self) -> usize {
        match self {
            MatrixBlock::Bus => 13,
            MatrixBlock::Gen => 10,
            MatrixBlock::Branch => 11,
            MatrixBlock::GenCost => 4,
        }
    }

    fn used(self, col: usize) -> bool {
        match self {
            MatrixBlock::Bus => !matches!(col, 6 | 10) && col < 13,
            MatrixBlock::Gen => col != 6 && col < 10,
            MatrixBlock::Branch => !matches!(col, 6 | 7) && col < 11,
            MatrixBlock::GenCost => col == 0 || col >= 3,
        }
    }
}

/// What the parser skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    /// 0-based columns present in the file but not consumed.
    pub ignored_columns: BTreeMap<MatrixBlock, Vec<usize>>,
    /// 0-based file rows of out-of-service generators.
    pub dropped_gens: Vec<usize>,
    /// 0-based file rows of out-of-service branches.
    pub dropped_branches: Vec<usize>,
}

pub fn parse_matpower(text: &str) -> Result<GridCase, GridError> {
    parse_matpower_with_report(text).map(|(case, _)| case)
}

pub fn parse_matpower_with_report(text: &str) -> Result<(GridCase, ParseReport), GridError> {
    let stripped: String = text
        .lines()
        .map(|l| l.split('%').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n");
    let name = function_name(&stripped).unwrap_or_default();
    let assignments = assignments(&stripped);
    let lookup = |key: &str| assignments.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

    let base_mva: f64 = lookup("baseMVA")
        .ok_or_else(|| GridError::MissingBlock("baseMVA".into()))?
        .trim()
        .parse()
        .map_err(|_| GridError::MalformedRow {
            block: "baseMVA".into(),
            row: 1,
            msg: "not a number".into(),
        })?;
    let mut report = ParseReport::default();
    let mut matrix = |block: MatrixBlock| -> Result<Vec<Vec<f64>>, GridError> {
        let body = lookup(block.name()).ok_or_else(|| GridError::MissingBlock(block.name().into()))?;
        let rows = parse_matrix(block, body)?;
        let mut ignored: Vec<usize> = Vec::new();
        for row in &rows {
            for c in 0..row.len() {
                if !block.used(c) && !ignored.contains(&c) {
                    ignored.push(c);
                }
            }
        }
        ignored.sort_unstable();
        if !ignored.is_empty() {
            report.ignored_columns.insert(block, ignored);
        }
        Ok(rows)
    };
    let bus_rows = matrix(MatrixBlock::Bus)?;
    let gen_rows = matrix(MatrixBlock::Gen)?;
    let branch_rows = matrix(MatrixBlock::Branch)?;
    let cost_rows = matrix(MatrixBlock::GenCost)?;

    let buses = bus_rows
        .iter()
        .enumerate()
        .map(|(k, r)| bus_from_row(k, r, base_mva))
        .collect::<Result<Vec<_>, _>>()?;

    if cost_rows.len() == 2 * gen_rows.len() && !gen_rows.is_empty() {
        return Err(GridError::UnsupportedCost {
            row: gen_rows.len() + 1,
            msg: "reactive power cost rows are not supported".into(),
        });
    }
    if cost_rows.len() != gen_rows.len() {
        return Err(GridError::MalformedRow {
            block: "gencost".into(),
            row: cost_rows.len(),
            msg: format!("{} cost rows for {} generators", cost_rows.len(), gen_rows.len()),
        });
    }
    let mut gens = Vec::with_capacity(gen_rows.len());
    for (k, (r, c)) in gen_rows.iter().zip(&cost_rows).enumerate() {
        let g = gen_from_row(k, r, cost_from_row(k, c)?, base_mva)?;
        if g.in_service {
            gens.push(g);
        } else {
            report.dropped_gens.push(k);
        }
    }
    let mut branches = Vec::with_capacity(branch_rows.len());
    for (k, r) in branch_rows.iter().enumerate() {
        let br = branch_from_row(k, r, base_mva)?;
        if br.in_service {
            branches.push(br);
        } else {
            report.dropped_branches.push(k);
        }
    }
    Ok((GridCase::new(name, base_mva, buses, gens, branches)?, report))
}

fn function_name(text: &str) -> Option<String> {
    let line = text.lines().find(|l| l.trim_start().starts_with("function"))?;
    let name = line.split('=').nth(1)?.trim();
    (!name.is_empty()).then(|| name.to_string())
}

/// `mpc.key = value;` pairs, with bracketed matrix bodies returned without the brackets.
fn assignments(text: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find("mpc.") {
        rest = &rest[pos + 4..];
        let key_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let key = rest[..key_len].to_string();
        let after = rest[key_len..].trim_start();
        let Some(after) = after.strip_prefix('=') else {
            continue;
        };
        let after = after.trim_start();
        if let Some(body) = after.strip_prefix('[') {
            let end = body.find(']').unwrap_or(body.len());
            out.push((key, body[..end].to_string()));
            rest = &body[end..];
        } else {
            let end = after.find([';', '\n']).unwrap_or(after.len());
            out.push((key, after[..end].to_string()));
            rest = &after[end..];
        }
    }
    out
}

fn parse_matrix(block: MatrixBlock, body: &str) -> Result<Vec<Vec<f64>>, GridError> {
    let mut rows = Vec::new();
    for chunk in body.split([';', '\n']) {
        let tokens: Vec<&str> = chunk
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            continue;
        }
        let row_no = rows.len() + 1;
        let values = tokens
            .iter()
            .map(|t| parse_number(t))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| GridError::MalformedRow {
                block: block.name().into(),
                row: row_no,
                msg: format!("non-numeric entry in `{}`", chunk.trim()),
            })?;
        if values.len() < block.min_cols() {
            return Err(GridError::MalformedRow {
                block: block.name().into(),
                row: row_no,
                msg: format!("{} columns, need at least {}", values.len(), block.min_cols()),
            });
        }
        rows.push(values);
    }
    Ok(rows)
}

fn parse_number(token: &str) -> Option<f64> {
    match token {
        "Inf" | "inf" => Some(f64::INFINITY),
        "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
        _ => token.parse().ok(),
    }
}

fn bus_id(v: f64, block: &str, row: usize) -> Result<BusId, GridError> {
    if v >= 1.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
        Ok(BusId(v as u64))
    } else {
        Err(GridError::MalformedRow {
            block: block.into(),
            row,
            msg: format!("bus id {v} is not a positive integer"),
        })
    }
}

fn bus_from_row(k: usize, r: &[f64], base: f64) -> Result<BusRecord, GridError> {
    let bus_type = match r[1] as i64 {
        1 => BusType::Pq,
        2 => BusType::Pv,
        3 => BusType::Slack,
        t => {
            return Err(GridError::MalformedRow {
                block: "bus".into(),
                row: k + 1,
                msg: format!("unsupported bus type {t}"),
            })
        }
    };
    Ok(BusRecord {
        id: bus_id(r[0], "bus", k + 1)?,
        bus_type,
        p_demand: r[2] / base,
        q_demand: r[3] / base,
        g_shunt: r[4] / base,
        b_shunt: r[5] / base,
        v_mag_init: r[7],
        v_ang_init: r[8].to_radians(),
        base_kv: r[9],
        v_max: r[11],
        v_min: r[12],
    })
}

fn cost_from_row(k: usize, r: &[f64]) -> Result<CostPoly, GridError> {
    let model = r[0] as i64;
    if model == 1 {
        return Err(GridError::UnsupportedCost {
            row: k + 1,
            msg: "piecewise-linear cost models are not supported".into(),
        });
    }
    if model != 2 {
        return Err(GridError::UnsupportedCost {
            row: k + 1,
            msg: format!("unknown cost model {model}"),
        });
    }
    let n = r[3];
    if n.fract() != 0.0 || !(0.0..=3.0).contains(&n) {
        return Err(GridError::UnsupportedCost {
            row: k + 1,
            msg: format!("polynomial with {n} coefficients; at most 3 (degree 2) are supported"),
        });
    }
    let n = n as usize;
    if r.len() < 4 + n {
        return Err(GridError::MalformedRow {
            block: "gencost".into(),
            row: k + 1,
            msg: format!("expected {n} coefficients"),
        });
    }
    // coefficients are listed highest degree first
    let mut c = [0.0; 3];
    for (d, v) in r[4..4 + n].iter().rev().enumerate() {
        c[d] = *v;
    }
    Ok(CostPoly {
        c0: c[0],
        c1: c[1],
        c2: c[2],
    })
}

fn gen_from_row(k: usize, r: &[f64], cost: CostPoly, base: f64) -> Result<GenRecord, GridError> {
    Ok(GenRecord {
        bus: bus_id(r[0], "gen", k + 1)?,
        p_init: r[1] / base,
        q_init: r[2] / base,
        q_max: r[3] / base,
        q_min: r[4] / base,
        v_setpoint: r[5],
        in_service: r[7] > 0.0,
        p_max: r[8] / base,
        p_min: r[9] / base,
        cost,
    })
}

fn branch_from_row(k: usize, r: &[f64], base: f64) -> Result<BranchRecord, GridError> {
    Ok(BranchRecord {
        from_bus: bus_id(r[0], "branch", k + 1)?,
        to_bus: bus_id(r[1], "branch", k + 1)?,
        r: r[2],
        x: r[3],
        b_charging: r[4],
        rate_a: r[5] / base,
        tap_ratio: if r[8] == 0.0 { 1.0 } else { r[8] },
        phase_shift: r[9].to_radians(),
        in_service: r[10] > 0.0,
    })
}

/// Serialize to MATPOWER text that parses back to an identical case.
pub fn to_matpower(case: &GridCase) -> String {
    let base = case.base_mva;
    let scaled = |p: f64| preimage(p, |v| v / base, p * base);
    let degrees = |a: f64| preimage(a, f64::to_radians, a.to_degrees());
    let name = if case.name.is_empty() {
        "case"
    } else {
        case.name.as_str()
    };

    let mut s = String::new();
    let _ = writeln!(s, "function mpc = {name}");
    let _ = writeln!(s, "mpc.version = '2';");
    let _ = writeln!(s, "mpc.baseMVA = {};", num(base));
    let _ = writeln!(
        s,
        "\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin"
    );
    let _ = writeln!(s, "mpc.bus = [");
    for b in &case.buses {
        row(
            &mut s,
            &[
                b.id.0 as f64,
                b.bus_type.code() as f64,
                scaled(b.p_demand),
                scaled(b.q_demand),
                scaled(b.g_shunt),
                scaled(b.b_shunt),
                1.0,
                b.v_mag_init,
                degrees(b.v_ang_init),
                b.base_kv,
                1.0,
                b.v_max,
                b.v_min,
            ],
        );
    }
    let _ = writeln!(s, "];\n\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin");
    let _ = writeln!(s, "mpc.gen = [");
    for g in &case.gens {
        row(
            &mut s,
            &[
                g.bus.0 as f64,
                scaled(g.p_init),
                scaled(g.q_init),
                scaled(g.q_max),
                scaled(g.q_min),
                g.v_setpoint,
                base,
                if g.in_service { 1.0 } else { 0.0 },
                scaled(g.p_max),
                scaled(g.p_min),
            ],
        );
    }
    let _ = writeln!(
        s,
        "];\n\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus"
    );
    let _ = writeln!(s, "mpc.branch = [");
    for br in &case.branches {
        let tap = if br.tap_ratio == 1.0 { 0.0 } else { br.tap_ratio };
        row(
            &mut s,
            &[
                br.from_bus.0 as f64,
                br.to_bus.0 as f64,
                br.r,
                br.x,
                br.b_charging,
                scaled(br.rate_a),
                0.0,
                0.0,
                tap,
                degrees(br.phase_shift),
                if br.in_service { 1.0 } else { 0.0 },
            ],
        );
    }
    let _ = writeln!(s, "];\n\n%\t2\tstartup\tshutdown\tn\tc2\tc1\tc0");
    let _ = writeln!(s, "mpc.gencost = [");
    for g in &case.gens {
        row(&mut s, &[2.0, 0.0, 0.0, 3.0, g.cost.c2, g.cost.c1, g.cost.c0]);
    }
    let _ = writeln!(s, "];");
    s
}

fn row(s: &mut String, values: &[f64]) {
    let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
    let _ = writeln!(s, "\t{};", cells.join("\t"));
}

fn num(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if v.fract() == 0.0 && v.abs() < 1e15 && !(v == 0.0 && v.is_sign_negative()) {
        return format!("{}", v as i64);
    }
    format!("{v:?}")
}

/// A value `v` near `guess` with `forward(v) == target` bitwise, if one exists nearby.
fn preimage(target: f64, forward: impl Fn(f64) -> f64, guess: f64) -> f64 {
    if !guess.is_finite() || forward(guess).to_bits() == target.to_bits() {
        return guess;
    }
    let (mut up, mut down) = (guess, guess);
    for _ in 0..64 {
        up = up.next_up();
        down = down.next_down();
        if forward(up).to_bits() == target.to_bits() {
            return up;
        }
        if forward(down).to_bits() == target.to_bits() {
            return down;
        }
    }
    guess
}
