use std::ops::Range;

use crate::sparse_core::{CscMatrix, TripletMatrix};

use super::flows::squared_magnitude;
use super::{check_len, NlpError, OriginalNlp};

/// Position of each block inside `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YBlocks {
    /// `x′ = x − x⁻`
    pub x_lower: Range<usize>,
    /// `x″ = x⁺ − x`
    pub x_upper: Range<usize>,
    /// `s′ = h(x) − h⁻`
    pub h_lower: Range<usize>,
    /// `s″ = h⁺ − h(x)`
    pub h_upper: Range<usize>,
}

/// Row blocks of `c(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBlocks {
    /// Power balance, real rows then reactive rows.
    pub balance: Range<usize>,
    /// `h(x) − h⁻ − s′`
    pub flow: Range<usize>,
    /// `x′ + x″ − (x⁺ − x⁻)`
    pub var_link: Range<usize>,
    /// `s′ + s″ − (h⁺ − h⁻)`
    pub flow_link: Range<usize>,
}

/// Slack form `min f(y) s.t. c(y) = 0, y ≥ 0` with frozen derivative patterns.
#[derive(Debug, Clone)]
pub struct CompactNlp {
    nlp: OriginalNlp,
    n: usize,
    m: usize,
    blocks: YBlocks,
    rows: RowBlocks,
    jac_pattern: CscMatrix,
    hess_pattern: CscMatrix,
    slots: Slots,
}

#[derive(Debug, Clone, Default)]
struct Slots {
    end_jac: Vec<[[usize; 4]; 2]>,
    end_hess: Vec<[[usize; 4]; 4]>,
    flow_jac: Vec<[usize; 4]>,
    flow_slack: Vec<usize>,
    shunt_jac: Vec<[usize; 2]>,
    shunt_hess: Vec<usize>,
    gen_jac: Vec<[usize; 2]>,
    gen_hess: Vec<usize>,
    var_link: Vec<[usize; 2]>,
    flow_link: Vec<[usize; 2]>,
}

/// Per-thread value storage; patterns are copies of the problem's and never change.
#[derive(Debug, Clone)]
pub struct EvalWorkspace {
    jac: CscMatrix,
    hess: CscMatrix,
}

impl EvalWorkspace {
    pub fn jacobian(&self) -> &CscMatrix {
        &self.jac
    }

    pub fn hessian(&self) -> &CscMatrix {
        &self.hess
    }
}

impl OriginalNlp {
    fn end_vars(&self, e: usize) -> [usize; 4] {
        let end = &self.ends[e];
        let l = &self.layout;
        [l.va(end.bus), l.va(end.other), l.vm(end.bus), l.vm(end.other)]
    }
}

impl CompactNlp {
    /// Build the slack form and freeze the Jacobian and Hessian patterns.
    pub fn new(nlp: OriginalNlp) -> Result<Self, NlpError> {
        for (j, (&lo, &hi)) in nlp.x_lo.iter().zip(&nlp.x_hi).enumerate() {
            if !(lo <= hi) {
                return Err(NlpError::InvertedBounds { index: j, lo, hi });
            }
        }
        let (n_x, n_h, nb) = (nlp.n_x(), nlp.n_h(), nlp.layout.n_bus);
        let blocks = YBlocks {
            x_lower: 0..n_x,
            x_upper: n_x..2 * n_x,
            h_lower: 2 * n_x..2 * n_x + n_h,
            h_upper: 2 * n_x + n_h..2 * n_x + 2 * n_h,
        };
        let rows = RowBlocks {
            balance: 0..2 * nb,
            flow: 2 * nb..2 * nb + n_h,
            var_link: 2 * nb + n_h..2 * nb + n_h + n_x,
            flow_link: 2 * nb + n_h + n_x..2 * nb + 2 * n_h + n_x,
        };
        let n = blocks.h_upper.end;
        let m = rows.flow_link.end;

        let l = nlp.layout;
        let mut jt = TripletMatrix::new(m, n);
        let mut ht = TripletMatrix::new(n, n);
        let mut jpush = |r: usize, c: usize| jt.push(r, c, 0.0).expect("index in range");
        let mut hpush = |r: usize, c: usize| ht.push(r.max(c), r.min(c), 0.0).expect("index in range");
        for (e, end) in nlp.ends.iter().enumerate() {
            let v = nlp.end_vars(e);
            for &c in &v {
                jpush(end.bus, c);
                jpush(nb + end.bus, c);
            }
            for a in 0..4 {
                for b in 0..=a {
                    hpush(v[a], v[b]);
                }
            }
        }
        for (k, &e) in nlp.limited_ends.iter().enumerate() {
            for c in nlp.end_vars(e) {
                jpush(rows.flow.start + k, c);
            }
            jpush(rows.flow.start + k, blocks.h_lower.start + k);
        }
        for i in 0..nb {
            jpush(i, l.vm(i));
            jpush(nb + i, l.vm(i));
            hpush(l.vm(i), l.vm(i));
        }
        for (k, &bus) in nlp.gen_bus.iter().enumerate() {
            jpush(bus, l.pg(k));
            jpush(nb + bus, l.qg(k));
            hpush(l.pg(k), l.pg(k));
        }
        for j in 0..n_x {
            jpush(rows.var_link.start + j, blocks.x_lower.start + j);
            jpush(rows.var_link.start + j, blocks.x_upper.start + j);
        }
        for k in 0..n_h {
            jpush(rows.flow_link.start + k, blocks.h_lower.start + k);
            jpush(rows.flow_link.start + k, blocks.h_upper.start + k);
        }
        let jac_pattern = jt.compress();
        let hess_pattern = ht.compress();

        let js = |r: usize, c: usize| jac_pattern.position(r, c).expect("entry in pattern");
        let hs = |r: usize, c: usize| hess_pattern.position(r.max(c), r.min(c)).expect("entry in pattern");
        let mut slots = Slots::default();
        for (e, end) in nlp.ends.iter().enumerate() {
            let v = nlp.end_vars(e);
            slots
                .end_jac
                .push([v.map(|c| js(end.bus, c)), v.map(|c| js(nb + end.bus, c))]);
            slots.end_hess.push(v.map(|a| v.map(|b| hs(a, b))));
        }
        for (k, &e) in nlp.limited_ends.iter().enumerate() {
            slots.flow_jac.push(nlp.end_vars(e).map(|c| js(rows.flow.start + k, c)));
            slots.flow_slack.push(js(rows.flow.start + k, blocks.h_lower.start + k));
        }
        for i in 0..nb {
            slots.shunt_jac.push([js(i, l.vm(i)), js(nb + i, l.vm(i))]);
            slots.shunt_hess.push(hs(l.vm(i), l.vm(i)));
        }
        for (k, &bus) in nlp.gen_bus.iter().enumerate() {
            slots.gen_jac.push([js(bus, l.pg(k)), js(nb + bus, l.qg(k))]);
            slots.gen_hess.push(hs(l.pg(k), l.pg(k)));
        }
        for j in 0..n_x {
            let r = rows.var_link.start + j;
            slots
                .var_link
                .push([js(r, blocks.x_lower.start + j), js(r, blocks.x_upper.start + j)]);
        }
        for k in 0..n_h {
            let r = rows.flow_link.start + k;
            slots
                .flow_link
                .push([js(r, blocks.h_lower.start + k), js(r, blocks.h_upper.start + k)]);
        }

        Ok(Self {
            nlp,
            n,
            m,
            blocks,
            rows,
            jac_pattern,
            hess_pattern,
            slots,
        })
    }

    pub fn original(&self) -> &OriginalNlp {
        &self.nlp
    }

    /// Number of primal variables.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of equality constraints.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &YBlocks {
        &self.blocks
    }

    pub fn rows(&self) -> &RowBlocks {
        &self.rows
    }

    /// `m × n` Jacobian structure.
    pub fn jac_pattern(&self) -> &CscMatrix {
        &self.jac_pattern
    }

    /// Lower triangle of the `n × n` Lagrangian Hessian structure.
    pub fn hess_pattern(&self) -> &CscMatrix {
        &self.hess_pattern
    }

    pub fn workspace(&self) -> EvalWorkspace {
        EvalWorkspace {
            jac: self.jac_pattern.clone(),
            hess: self.hess_pattern.clone(),
        }
    }

    /// `x = x⁻ + x′`
    pub fn x_of(&self, y: &[f64]) -> Result<Vec<f64>, NlpError> {
        check_len("y", y, self.n)?;
        Ok(self.x_unchecked(y))
    }

    fn x_unchecked(&self, y: &[f64]) -> Vec<f64> {
        self.nlp
            .x_lo
            .iter()
            .zip(&y[self.blocks.x_lower.clone()])
            .map(|(lo, d)| lo + d)
            .collect()
    }

    /// The `y` that represents `x` with every slack equation satisfied.
    ///
    /// `x′` is chosen so that `x⁻ + x′` reproduces `x` bitwise whenever such a
    /// float exists next to `x − x⁻`.
    pub fn y_of(&self, x: &[f64]) -> Result<Vec<f64>, NlpError> {
        check_len("x", x, self.nlp.n_x())?;
        let h = self.nlp.inequality(x)?;
        let mut y = Vec::with_capacity(self.n);
        for (&xj, &lo) in x.iter().zip(&self.nlp.x_lo) {
            y.push(exact_offset(xj, lo));
        }
        y.extend(x.iter().zip(&self.nlp.x_hi).map(|(xj, hi)| hi - xj));
        y.extend(h.iter().zip(&self.nlp.h_lo).map(|(hk, lo)| hk - lo));
        y.extend(h.iter().zip(&self.nlp.h_hi).map(|(hk, hi)| hi - hk));
        Ok(y)
    }

    pub fn eval_objective(&self, y: &[f64]) -> Result<f64, NlpError> {
        check_len("y", y, self.n)?;
        self.nlp.objective(&self.x_unchecked(y))
    }

    pub fn eval_gradient(&self, y: &[f64]) -> Result<Vec<f64>, NlpError> {
        check_len("y", y, self.n)?;
        let x = self.x_unchecked(y);
        let base = self.nlp.base_mva;
        let mut grad = vec![0.0; self.n];
        for (k, c) in self.nlp.costs.iter().enumerate() {
            let j = self.nlp.layout.pg(k);
            grad[j] = base * (2.0 * c.c2 * base * x[j] + c.c1);
        }
        Ok(grad)
    }

    pub fn eval_constraints(&self, y: &[f64]) -> Result<Vec<f64>, NlpError> {
        check_len("y", y, self.n)?;
        let nlp = &self.nlp;
        let x = self.x_unchecked(y);
        let mut c = nlp.equality(&x)?;
        c.reserve(self.m - c.len());
        let h = nlp.inequality(&x)?;
        let s_lo = &y[self.blocks.h_lower.clone()];
        let s_hi = &y[self.blocks.h_upper.clone()];
        c.extend((0..h.len()).map(|k| h[k] - nlp.h_lo[k] - s_lo[k]));
        let (x1, x2) = (&y[self.blocks.x_lower.clone()], &y[self.blocks.x_upper.clone()]);
        c.extend((0..x.len()).map(|j| x1[j] + x2[j] - (nlp.x_hi[j] - nlp.x_lo[j])));
        c.extend((0..h.len()).map(|k| s_lo[k] + s_hi[k] - (nlp.h_hi[k] - nlp.h_lo[k])));
        Ok(c)
    }

    /// Overwrite the Jacobian values in `ws`; structurally present zeros stay stored.
    pub fn eval_jacobian<'w>(&self, y: &[f64], ws: &'w mut EvalWorkspace) -> Result<&'w CscMatrix, NlpError> {
        check_len("y", y, self.n)?;
        let nlp = &self.nlp;
        let l = &nlp.layout;
        let x = self.x_unchecked(y);
        let s = &self.slots;
        let vals = ws.jac.values_mut();
        vals.iter_mut().for_each(|v| *v = 0.0);
        for (e, end) in nlp.ends.iter().enumerate() {
            let f = end.coeffs(l, &x).flow();
            for a in 0..4 {
                vals[s.end_jac[e][0][a]] -= f.dp[a];
                vals[s.end_jac[e][1][a]] -= f.dq[a];
            }
        }
        for (k, &e) in nlp.limited_ends.iter().enumerate() {
            let (_, g, _) = squared_magnitude(&nlp.ends[e].coeffs(l, &x));
            for a in 0..4 {
                vals[s.flow_jac[k][a]] += g[a];
            }
            vals[s.flow_slack[k]] = -1.0;
        }
        for (i, sh) in nlp.shunts.iter().enumerate() {
            let vm = x[l.vm(i)];
            vals[s.shunt_jac[i][0]] -= 2.0 * sh.re * vm;
            vals[s.shunt_jac[i][1]] += 2.0 * sh.im * vm;
        }
        for slot in &s.gen_jac {
            vals[slot[0]] += 1.0;
            vals[slot[1]] += 1.0;
        }
        for slot in s.var_link.iter().chain(&s.flow_link) {
            vals[slot[0]] = 1.0;
            vals[slot[1]] = 1.0;
        }
        Ok(&ws.jac)
    }

    /// Lower triangle of `∇²f + Σ λᵢ∇²cᵢ`.
    pub fn eval_hessian<'w>(
        &self,
        y: &[f64],
        lambda: &[f64],
        ws: &'w mut EvalWorkspace,
    ) -> Result<&'w CscMatrix, NlpError> {
        check_len("y", y, self.n)?;
        check_len("lambda", lambda, self.m)?;
        let nlp = &self.nlp;
        let l = &nlp.layout;
        let nb = l.n_bus;
        let x = self.x_unchecked(y);
        let s = &self.slots;
        let vals = ws.hess.values_mut();
        vals.iter_mut().for_each(|v| *v = 0.0);

        let base = nlp.base_mva;
        for (k, c) in nlp.costs.iter().enumerate() {
            vals[s.gen_hess[k]] += 2.0 * c.c2 * base * base;
        }
        for (i, sh) in nlp.shunts.iter().enumerate() {
            vals[s.shunt_hess[i]] += -2.0 * sh.re * lambda[i] + 2.0 * sh.im * lambda[nb + i];
        }
        let mut add_local = |slots: &[[usize; 4]; 4], w: f64, h: &[[f64; 4]; 4]| {
            for a in 0..4 {
                for b in 0..=a {
                    vals[slots[a][b]] += w * h[a][b];
                }
            }
        };
        for (e, end) in nlp.ends.iter().enumerate() {
            let (wp, wq) = (lambda[end.bus], lambda[nb + end.bus]);
            if wp == 0.0 && wq == 0.0 {
                continue;
            }
            let (hp, hq) = end.coeffs(l, &x).hessians();
            add_local(&s.end_hess[e], -wp, &hp);
            add_local(&s.end_hess[e], -wq, &hq);
        }
        for (k, &e) in nlp.limited_ends.iter().enumerate() {
            let w = lambda[self.rows.flow.start + k];
            if w == 0.0 {
                continue;
            }
            let (_, _, h) = squared_magnitude(&nlp.ends[e].coeffs(l, &x));
            add_local(&s.end_hess[e], w, &h);
        }
        Ok(&ws.hess)
    }
}

fn exact_offset(x: f64, lo: f64) -> f64 {
    let guess = x - lo;
    if lo + guess == x {
        return guess;
    }
    let (mut up, mut down) = (guess, guess);
    for _ in 0..4 {
        up = up.next_up();
        down = down.next_down();
        if lo + up == x {
            return up;
        }
        if lo + down == x {
            return down;
        }
    }
    guess
}
