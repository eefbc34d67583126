use crate::sparse_core::{CscMatrix, TripletMatrix};

/// One Newton system `K Δ = r` with `K = [[H + D_y, Jᵀ], [J, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSystem {
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    pub n: usize,
    pub m: usize,
}

/// Builds every `K_k` of a run into one frozen pattern.
///
/// Both triangles are stored. The (1,1) diagonal and the (2,2) diagonal are
/// always present, the latter as explicit zeros, so diagonal regularization
/// never changes the structure.
#[derive(Debug, Clone)]
pub struct KktAssembler {
    n: usize,
    m: usize,
    template: CscMatrix,
    /// For each lower-Hessian entry: its slot and, off the diagonal, the mirrored slot.
    hess_to_k: Vec<(usize, Option<usize>)>,
    /// For each Jacobian entry `(r, c)`: slots of `(n + r, c)` and `(c, n + r)`.
    jac_to_k: Vec<(usize, usize)>,
    diag: Vec<usize>,
}

impl KktAssembler {
    pub fn new(jac_pattern: &CscMatrix, hess_pattern: &CscMatrix) -> Self {
        let (m, n) = (jac_pattern.n_rows(), jac_pattern.n_cols());
        let dim = n + m;
        let mut t = TripletMatrix::with_capacity(dim, dim, dim + 2 * hess_pattern.nnz() + 2 * jac_pattern.nnz());
        for i in 0..dim {
            t.push(i, i, 0.0).expect("in range");
        }
        for (r, c, _) in hess_pattern.triplets() {
            t.push(r, c, 0.0).expect("in range");
            t.push(c, r, 0.0).expect("in range");
        }
        for (r, c, _) in jac_pattern.triplets() {
            t.push(n + r, c, 0.0).expect("in range");
            t.push(c, n + r, 0.0).expect("in range");
        }
        let template = t.compress();
        let pos = |r: usize, c: usize| template.position(r, c).expect("entry in pattern");
        let hess_to_k = hess_pattern
            .triplets()
            .map(|(r, c, _)| (pos(r, c), (r != c).then(|| pos(c, r))))
            .collect();
        let jac_to_k = jac_pattern
            .triplets()
            .map(|(r, c, _)| (pos(n + r, c), pos(c, n + r)))
            .collect();
        let diag = (0..dim).map(|i| pos(i, i)).collect();
        Self {
            n,
            m,
            template,
            hess_to_k,
            jac_to_k,
            diag,
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn pattern(&self) -> &CscMatrix {
        &self.template
    }

    /// Assemble `K` for the given Hessian (lower), Jacobian, and `D_y = μ Y⁻²`;
    /// `delta` is added on the (1,1) diagonal and subtracted on the (2,2) diagonal.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        &self,
        hess: &CscMatrix,
        jac: &CscMatrix,
        y: &[f64],
        mu: f64,
        delta: f64,
        r_y: &[f64],
        r_lambda: &[f64],
    ) -> KktSystem {
        let mut matrix = self.template.clone();
        let vals = matrix.values_mut();
        for (&(a, b), &v) in self.hess_to_k.iter().zip(hess.values()) {
            vals[a] += v;
            if let Some(b) = b {
                vals[b] += v;
            }
        }
        for (&(a, b), &v) in self.jac_to_k.iter().zip(jac.values()) {
            vals[a] += v;
            vals[b] += v;
        }
        for i in 0..self.n {
            vals[self.diag[i]] += mu / (y[i] * y[i]) + delta;
        }
        for i in 0..self.m {
            vals[self.diag[self.n + i]] -= delta;
        }
        let rhs = r_y.iter().chain(r_lambda).map(|v| -v).collect();
        KktSystem {
            matrix,
            rhs,
            n: self.n,
            m: self.m,
        }
    }
}
