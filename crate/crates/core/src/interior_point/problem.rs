use crate::acopf_nlp::{CompactNlp, EvalWorkspace, NlpError};
use crate::sparse_core::CscMatrix;

/// A problem `min f(y) s.t. c(y) = 0, y ≥ 0` with fixed derivative patterns.
pub trait SlackProblem {
    type Workspace;

    fn n(&self) -> usize;
    fn m(&self) -> usize;
    /// `m × n`
    fn jac_pattern(&self) -> &CscMatrix;
    /// Lower triangle, `n × n`.
    fn hess_pattern(&self) -> &CscMatrix;
    fn workspace(&self) -> Self::Workspace;
    /// Starting point before clipping away from zero.
    fn start(&self) -> Result<Vec<f64>, NlpError>;
    fn objective(&self, y: &[f64]) -> Result<f64, NlpError>;
    fn gradient(&self, y: &[f64]) -> Result<Vec<f64>, NlpError>;
    fn constraints(&self, y: &[f64]) -> Result<Vec<f64>, NlpError>;
    fn jacobian<'w>(&self, y: &[f64], ws: &'w mut Self::Workspace) -> Result<&'w CscMatrix, NlpError>;
    fn hessian<'w>(&self, y: &[f64], lambda: &[f64], ws: &'w mut Self::Workspace) -> Result<&'w CscMatrix, NlpError>;
}

impl SlackProblem for CompactNlp {
    type Workspace = EvalWorkspace;

    fn n(&self) -> usize {
        CompactNlp::n(self)
    }

    fn m(&self) -> usize {
        CompactNlp::m(self)
    }

    fn jac_pattern(&self) -> &CscMatrix {
        CompactNlp::jac_pattern(self)
    }

    fn hess_pattern(&self) -> &CscMatrix {
        CompactNlp::hess_pattern(self)
    }

    fn workspace(&self) -> EvalWorkspace {
        CompactNlp::workspace(self)
    }

    fn start(&self) -> Result<Vec<f64>, NlpError> {
        self.y_of(&self.original().x_start)
    }

    fn objective(&self, y: &[f64]) -> Result<f64, NlpError> {
        self.eval_objective(y)
    }

    fn gradient(&self, y: &[f64]) -> Result<Vec<f64>, NlpError> {
        self.eval_gradient(y)
    }

    fn constraints(&self, y: &[f64]) -> Result<Vec<f64>, NlpError> {
        self.eval_constraints(y)
    }

    fn jacobian<'w>(&self, y: &[f64], ws: &'w mut EvalWorkspace) -> Result<&'w CscMatrix, NlpError> {
        self.eval_jacobian(y, ws)
    }

    fn hessian<'w>(&self, y: &[f64], lambda: &[f64], ws: &'w mut EvalWorkspace) -> Result<&'w CscMatrix, NlpError> {
        self.eval_hessian(y, lambda, ws)
    }
}
