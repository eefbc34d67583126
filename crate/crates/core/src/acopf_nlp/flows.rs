//! Complex power leaving a bus through one branch end, in polar coordinates.
//!
//! With `a = |V_self|`, `b = |V_other|`, `θ = ∠V_self − ∠V_other`, self
//! admittance `Gs + jBs` and mutual admittance `Gm + jBm`:
//!
//! ```text
//! P = a²Gs + ab(Gm cosθ + Bm sinθ)
//! Q = −a²Bs + ab(Gm sinθ − Bm cosθ)
//! ```
//!
//! Local derivatives are taken with respect to `[Va_self, Va_other, Vm_self, Vm_other]`.

use num_complex::Complex64;

pub(crate) type Grad4 = [f64; 4];
pub(crate) type Hess4 = [[f64; 4]; 4];

#[derive(Debug, Clone, Copy)]
pub(crate) struct EndFlow {
    pub p: f64,
    pub q: f64,
    pub dp: Grad4,
    pub dq: Grad4,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EndCoeffs {
    cos_t: f64,
    sin_t: f64,
    a: f64,
    b: f64,
    gs: f64,
    bs: f64,
    gm: f64,
    bm: f64,
}

impl EndCoeffs {
    pub fn new(self_adm: Complex64, mutual: Complex64, va_self: f64, va_other: f64, a: f64, b: f64) -> Self {
        let (sin_t, cos_t) = (va_self - va_other).sin_cos();
        Self {
            cos_t,
            sin_t,
            a,
            b,
            gs: self_adm.re,
            bs: self_adm.im,
            gm: mutual.re,
            bm: mutual.im,
        }
    }

    fn t0(&self) -> f64 {
        self.gm * self.cos_t + self.bm * self.sin_t
    }

    fn q0(&self) -> f64 {
        self.gm * self.sin_t - self.bm * self.cos_t
    }

    pub fn value(&self) -> (f64, f64) {
        let (a, b) = (self.a, self.b);
        let ab = a * b;
        (a * a * self.gs + ab * self.t0(), -a * a * self.bs + ab * self.q0())
    }

    pub fn flow(&self) -> EndFlow {
        let (a, b) = (self.a, self.b);
        let (t0, q0) = (self.t0(), self.q0());
        let ab = a * b;
        let (p, q) = self.value();
        let p_t = -ab * q0;
        let p_a = 2.0 * a * self.gs + b * t0;
        let p_b = a * t0;
        let q_t = ab * t0;
        let q_a = -2.0 * a * self.bs + b * q0;
        let q_b = a * q0;
        EndFlow {
            p,
            q,
            dp: [p_t, -p_t, p_a, p_b],
            dq: [q_t, -q_t, q_a, q_b],
        }
    }

    /// Second derivatives of `P` and `Q`.
    pub fn hessians(&self) -> (Hess4, Hess4) {
        let (a, b) = (self.a, self.b);
        let (t0, q0) = (self.t0(), self.q0());
        let ab = a * b;
        let hp = expand(-ab * t0, -b * q0, -a * q0, 2.0 * self.gs, t0, 0.0);
        let hq = expand(-ab * q0, b * t0, a * t0, -2.0 * self.bs, q0, 0.0);
        (hp, hq)
    }
}

/// Map `(θ, a, b)` second derivatives onto `[Va_s, Va_o, a, b]`, using `θ = Va_s − Va_o`.
fn expand(tt: f64, ta: f64, tb: f64, aa: f64, ab: f64, bb: f64) -> Hess4 {
    [
        [tt, -tt, ta, tb],
        [-tt, tt, -ta, -tb],
        [ta, -ta, aa, ab],
        [tb, -tb, ab, bb],
    ]
}

/// Gradient and Hessian of `P² + Q²`.
pub(crate) fn squared_magnitude(coeffs: &EndCoeffs) -> (f64, Grad4, Hess4) {
    let f = coeffs.flow();
    let (hp, hq) = coeffs.hessians();
    let mut g = [0.0; 4];
    let mut h = [[0.0; 4]; 4];
    for i in 0..4 {
        g[i] = 2.0 * (f.p * f.dp[i] + f.q * f.dq[i]);
        for j in 0..4 {
            h[i][j] = 2.0 * (f.dp[i] * f.dp[j] + f.p * hp[i][j] + f.dq[i] * f.dq[j] + f.q * hq[i][j]);
        }
    }
    (f.p * f.p + f.q * f.q, g, h)
}
