use std::collections::VecDeque;

use num_complex::Complex64;

use crate::sparse_core::{CscMatrix, TripletMatrix};

use super::{GridCase, GridError};

/// Two-port π-model of one in-service branch:
/// `I_from = yff·V_from + yft·V_to`, `I_to = ytf·V_from + ytt·V_to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAdmittance {
    pub from: usize,
    pub to: usize,
    pub yff: Complex64,
    pub yft: Complex64,
    pub ytf: Complex64,
    pub ytt: Complex64,
    /// Per-unit MVA limit, 0 when unlimited.
    pub rate_a: f64,
}

/// Bus admittance matrix stored as real and imaginary parts sharing one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct BusAdmittance {
    pub g: CscMatrix,
    pub b: CscMatrix,
}

impl BusAdmittance {
    pub fn n(&self) -> usize {
        self.g.n_rows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.g.get(i, j).unwrap_or(0.0), self.b.get(i, j).unwrap_or(0.0))
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.n();
        let (g, b) = (self.g.to_dense(), self.b.to_dense());
        (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(g[i][j], b[i][j])).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Admittance {
    pub ybus: BusAdmittance,
    pub branches: Vec<BranchAdmittance>,
    /// Shunt admittance per bus.
    pub shunts: Vec<Complex64>,
}

impl Admittance {
    /// Buses not reachable from `root` through in-service branches.
    pub fn unreachable_from(&self, root: usize) -> Vec<usize> {
        let n = self.ybus.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(i) = queue.pop_front() {
            for &j in self.ybus.g.col(i).0 {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        (0..n).filter(|&i| !seen[i]).collect()
    }
}

/// Standard π-model with an ideal phase-shifting transformer at the from end.
pub fn branch_two_port(r: f64, x: f64, b_charging: f64, tap: f64, shift: f64) -> [Complex64; 4] {
    let ys = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
    let t = Complex64::from_polar(if tap == 0.0 { 1.0 } else { tap }, shift);
    let ytt = ys + Complex64::new(0.0, b_charging / 2.0);
    let yff = ytt / (t * t.conj());
    let yft = -ys / t.conj();
    let ytf = -ys / t;
    [yff, yft, ytf, ytt]
}

/// Bus admittance matrix and per-branch two-ports for the in-service network.
pub fn build_admittance(case: &GridCase) -> Result<Admittance, GridError> {
    let n = case.n_bus();
    let mut branches = Vec::with_capacity(case.branches.len());
    for (k, br) in case.branches.iter().enumerate() {
        if !br.in_service {
            continue;
        }
        if br.r == 0.0 && br.x == 0.0 {
            return Err(GridError::ZeroImpedance {
                index: k,
                from: br.from_bus,
                to: br.to_bus,
            });
        }
        let from = case.index_of(br.from_bus).expect("validated case");
        let to = case.index_of(br.to_bus).expect("validated case");
        let [yff, yft, ytf, ytt] = branch_two_port(br.r, br.x, br.b_charging, br.tap_ratio, br.phase_shift);
        branches.push(BranchAdmittance {
            from,
            to,
            yff,
            yft,
            ytf,
            ytt,
            rate_a: br.rate_a,
        });
    }
    let shunts: Vec<Complex64> = case
        .buses
        .iter()
        .map(|b| Complex64::new(b.g_shunt, b.b_shunt))
        .collect();

    let mut tg = TripletMatrix::with_capacity(n, n, n + 4 * branches.len());
    let mut tb = TripletMatrix::with_capacity(n, n, n + 4 * branches.len());
    let mut push = |i: usize, j: usize, y: Complex64| {
        tg.push(i, j, y.re).expect("bus index in range");
        tb.push(i, j, y.im).expect("bus index in range");
    };
    for (i, y) in shunts.iter().enumerate() {
        push(i, i, *y);
    }
    for br in &branches {
        push(br.from, br.from, br.yff);
        push(br.from, br.to, br.yft);
        push(br.to, br.from, br.ytf);
        push(br.to, br.to, br.ytt);
    }
    Ok(Admittance {
        ybus: BusAdmittance {
            g: tg.compress(),
            b: tb.compress(),
        },
        branches,
        shunts,
    })
}
