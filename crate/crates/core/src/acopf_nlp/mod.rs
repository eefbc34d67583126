//! AC optimal power flow as a nonlinear program, and its slack form.
//!
//! The original problem is
//!
//! ```text
//! min F(x)  s.t.  g(x) = 0,  h⁻ ≤ h(x) ≤ h⁺,  x⁻ ≤ x ≤ x⁺
//! ```
//!
//! with `x = (Va, Vm, Pg, Qg)`, `g` the real and reactive power balance at every
//! bus and `h` the squared apparent power at both ends of every rated branch.
//! [`CompactNlp`] rewrites it over `y = (x′, x″, s′, s″) ≥ 0` with `x = x⁻ + x′`
//! and equality constraints only; its Jacobian and Hessian patterns are fixed
//! when it is built.

mod compact;
mod flows;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid_model::{build_admittance, CostPoly, GridCase, GridError};

pub use compact::{CompactNlp, EvalWorkspace, RowBlocks, YBlocks};

use flows::EndCoeffs;

#[derive(Debug, thiserror::Error)]
pub enum NlpError {
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("variable {index}: lower bound {lo} above upper bound {hi}")]
    InvertedBounds { index: usize, lo: f64, hi: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub(crate) fn check_len(what: &'static str, v: &[f64], expected: usize) -> Result<(), NlpError> {
    if v.len() != expected {
        return Err(NlpError::DimensionMismatch {
            what,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// How the bound vectors are completed before compacting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlpOptions {
    /// Replacement for infinite or absent bounds.
    pub infinite_bound: f64,
    /// Fixed variables get `x ± relax·max(1, |x|)` so the slack form keeps an interior.
    pub fixed_relax: f64,
    /// Half-width of the angle window around the reference angle.
    pub angle_window: f64,
}

impl Default for NlpOptions {
    fn default() -> Self {
        Self {
            infinite_bound: 1e8,
            fixed_relax: 1e-6,
            angle_window: PI,
        }
    }
}

/// Index arithmetic for `x = (Va, Vm, Pg, Qg)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarLayout {
    pub n_bus: usize,
    pub n_gen: usize,
}

impl VarLayout {
    pub fn va(&self, bus: usize) -> usize {
        bus
    }
    pub fn vm(&self, bus: usize) -> usize {
        self.n_bus + bus
    }
    pub fn pg(&self, gen: usize) -> usize {
        2 * self.n_bus + gen
    }
    pub fn qg(&self, gen: usize) -> usize {
        2 * self.n_bus + self.n_gen + gen
    }
    pub fn n_x(&self) -> usize {
        2 * (self.n_bus + self.n_gen)
    }
}

/// One end of an in-service branch: flow leaving `bus` towards `other`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEnd {
    pub branch: usize,
    pub bus: usize,
    pub other: usize,
    pub self_adm: Complex64,
    pub mutual_adm: Complex64,
}

impl BranchEnd {
    pub(crate) fn coeffs(&self, layout: &VarLayout, x: &[f64]) -> EndCoeffs {
        EndCoeffs::new(
            self.self_adm,
            self.mutual_adm,
            x[layout.va(self.bus)],
            x[layout.va(self.other)],
            x[layout.vm(self.bus)],
            x[layout.vm(self.other)],
        )
    }
}

/// The network optimization problem in its original variables.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalNlp {
    pub name: String,
    pub layout: VarLayout,
    pub base_mva: f64,
    pub slack_bus: usize,
    /// Both ends of every in-service branch, from end first.
    pub ends: Vec<BranchEnd>,
    /// Indices into `ends` of monitored ends, in `h` order.
    pub limited_ends: Vec<usize>,
    pub shunts: Vec<Complex64>,
    pub p_load: Vec<f64>,
    pub q_load: Vec<f64>,
    pub gen_bus: Vec<usize>,
    pub costs: Vec<CostPoly>,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub h_lo: Vec<f64>,
    pub h_hi: Vec<f64>,
    /// Flat start clipped into the bounds.
    pub x_start: Vec<f64>,
}

/// Build the optimization problem of a validated case.
pub fn assemble_nlp(case: &GridCase, options: &NlpOptions) -> Result<OriginalNlp, NlpError> {
    if case.gens.is_empty() {
        return Err(GridError::NoGenerator.into());
    }
    let slack = case.slack_bus()?;
    let adm = build_admittance(case)?;
    if let Some(&bus) = adm.unreachable_from(slack).first() {
        return Err(GridError::Disconnected(case.buses[bus].id).into());
    }
    let layout = VarLayout {
        n_bus: case.n_bus(),
        n_gen: case.gens.len(),
    };
    let mut ends = Vec::with_capacity(2 * adm.branches.len());
    let mut limited_ends = Vec::new();
    let mut h_hi = Vec::new();
    for (k, br) in adm.branches.iter().enumerate() {
        for (bus, other, self_adm, mutual_adm) in [(br.from, br.to, br.yff, br.yft), (br.to, br.from, br.ytt, br.ytf)] {
            if br.rate_a > 0.0 {
                limited_ends.push(ends.len());
                h_hi.push(br.rate_a * br.rate_a);
            }
            ends.push(BranchEnd {
                branch: k,
                bus,
                other,
                self_adm,
                mutual_adm,
            });
        }
    }

    let inf = options.infinite_bound;
    let finite = |v: f64| v.clamp(-inf, inf);
    let n_x = layout.n_x();
    let (mut x_lo, mut x_hi) = (vec![0.0; n_x], vec![0.0; n_x]);
    let ref_angle = case.buses[slack].v_ang_init;
    for (i, b) in case.buses.iter().enumerate() {
        let (lo, hi) = if i == slack {
            (ref_angle, ref_angle)
        } else {
            (ref_angle - options.angle_window, ref_angle + options.angle_window)
        };
        (x_lo[layout.va(i)], x_hi[layout.va(i)]) = (lo, hi);
        (x_lo[layout.vm(i)], x_hi[layout.vm(i)]) = (finite(b.v_min), finite(b.v_max));
    }
    for (k, g) in case.gens.iter().enumerate() {
        (x_lo[layout.pg(k)], x_hi[layout.pg(k)]) = (finite(g.p_min), finite(g.p_max));
        (x_lo[layout.qg(k)], x_hi[layout.qg(k)]) = (finite(g.q_min), finite(g.q_max));
    }
    for j in 0..n_x {
        if x_lo[j] > x_hi[j] {
            return Err(NlpError::InvertedBounds {
                index: j,
                lo: x_lo[j],
                hi: x_hi[j],
            });
        }
        if x_lo[j] == x_hi[j] {
            let d = options.fixed_relax * x_lo[j].abs().max(1.0);
            x_lo[j] -= d;
            x_hi[j] += d;
        }
    }

    let mut x_start: Vec<f64> = x_lo.iter().zip(&x_hi).map(|(l, h)| 0.5 * (l + h)).collect();
    for i in 0..layout.n_bus {
        x_start[layout.va(i)] = ref_angle;
    }

    Ok(OriginalNlp {
        name: case.name.clone(),
        layout,
        base_mva: case.base_mva,
        slack_bus: slack,
        // S² ≥ 0 always holds; a lower limit at 0 would be active with a
        // vanishing gradient on any idle line, so it sits at −rate² instead.
        h_lo: h_hi.iter().map(|h| -h).collect(),
        h_hi,
        ends,
        limited_ends,
        shunts: adm.shunts,
        p_load: case.buses.iter().map(|b| b.p_demand).collect(),
        q_load: case.buses.iter().map(|b| b.q_demand).collect(),
        gen_bus: case
            .gens
            .iter()
            .map(|g| case.index_of(g.bus).expect("validated case"))
            .collect(),
        costs: case.gens.iter().map(|g| g.cost).collect(),
        x_lo,
        x_hi,
        x_start,
    })
}

/// Slack form of `nlp`; see [`CompactNlp`].
pub fn to_compact(nlp: OriginalNlp) -> Result<CompactNlp, NlpError> {
    CompactNlp::new(nlp)
}

impl OriginalNlp {
    pub fn n_x(&self) -> usize {
        self.layout.n_x()
    }

    pub fn n_g(&self) -> usize {
        2 * self.layout.n_bus
    }

    pub fn n_h(&self) -> usize {
        self.limited_ends.len()
    }

    /// Total generation cost in $/h.
    pub fn objective(&self, x: &[f64]) -> Result<f64, NlpError> {
        check_len("x", x, self.n_x())?;
        let base = self.base_mva;
        Ok(self
            .costs
            .iter()
            .enumerate()
            .map(|(k, c)| c.eval_mw(base * x[self.layout.pg(k)]))
            .sum())
    }

    /// Power balance: generation minus load minus injection into the network, real rows first.
    pub fn equality(&self, x: &[f64]) -> Result<Vec<f64>, NlpError> {
        check_len("x", x, self.n_x())?;
        let l = &self.layout;
        let nb = l.n_bus;
        let mut g = vec![0.0; 2 * nb];
        for i in 0..nb {
            let vm2 = x[l.vm(i)] * x[l.vm(i)];
            g[i] = -self.p_load[i] - self.shunts[i].re * vm2;
            g[nb + i] = -self.q_load[i] + self.shunts[i].im * vm2;
        }
        for (k, &bus) in self.gen_bus.iter().enumerate() {
            g[bus] += x[l.pg(k)];
            g[nb + bus] += x[l.qg(k)];
        }
        for e in &self.ends {
            let (p, q) = e.coeffs(l, x).value();
            g[e.bus] -= p;
            g[nb + e.bus] -= q;
        }
        Ok(g)
    }

    /// Squared apparent power at every monitored branch end.
    pub fn inequality(&self, x: &[f64]) -> Result<Vec<f64>, NlpError> {
        check_len("x", x, self.n_x())?;
        Ok(self
            .limited_ends
            .iter()
            .map(|&e| {
                let (p, q) = self.ends[e].coeffs(&self.layout, x).value();
                p * p + q * q
            })
            .collect())
    }

    /// Largest violation of `g = 0`, `h⁻ ≤ h ≤ h⁺` and `x⁻ ≤ x ≤ x⁺`.
    pub fn constraint_violation(&self, x: &[f64]) -> Result<f64, NlpError> {
        let g = self.equality(x)?;
        let h = self.inequality(x)?;
        let mut v = g.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        for (k, hk) in h.iter().enumerate() {
            v = v.max(self.h_lo[k] - hk).max(hk - self.h_hi[k]);
        }
        for j in 0..x.len() {
            v = v.max(self.x_lo[j] - x[j]).max(x[j] - self.x_hi[j]);
        }
        Ok(v)
    }
}
