//! The barrier solver is not tied to power flow: any problem of the form
//! `min f(y) s.t. c(y) = 0, y ≥ 0` with fixed derivative patterns can be
//! plugged in. Here: split a budget across assets to minimise a separable
//! quadratic risk, `min Σ ½ wᵢ yᵢ² − rᵢ yᵢ  s.t.  Σ yᵢ = 1, y ≥ 0`.
//!
//! ```text
//! cargo run --example custom_problem
//! ```

use gridkkt::acopf_nlp::NlpError;
use gridkkt::interior_point::{solve_problem, IpmOptions, NoObserver, SlackProblem};
use gridkkt::sparse_core::{CscMatrix, TripletMatrix};

struct Allocation {
    risk: Vec<f64>,
    reward: Vec<f64>,
    jac: CscMatrix,
    hess: CscMatrix,
}

impl Allocation {
    fn new(risk: Vec<f64>, reward: Vec<f64>) -> Self {
        let n = risk.len();
        let mut jac = TripletMatrix::new(1, n);
        let mut hess = TripletMatrix::new(n, n);
        for (i, w) in risk.iter().enumerate() {
            jac.push(0, i, 1.0).unwrap();
            hess.push(i, i, *w).unwrap();
        }
        Self {
            risk,
            reward,
            jac: jac.compress(),
            hess: hess.compress(),
        }
    }
}

impl SlackProblem for Allocation {
    // Both derivatives are constant, so there is nothing to update.
    type Workspace = (CscMatrix, CscMatrix);

    fn n(&self) -> usize {
        self.risk.len()
    }
    fn m(&self) -> usize {
        1
    }
    fn jac_pattern(&self) -> &CscMatrix {
        &self.jac
    }
    fn hess_pattern(&self) -> &CscMatrix {
        &self.hess
    }
    fn workspace(&self) -> Self::Workspace {
        (self.jac.clone(), self.hess.clone())
    }
    fn start(&self) -> Result<Vec<f64>, NlpError> {
        Ok(vec![1.0 / self.n() as f64; self.n()])
    }
    fn objective(&self, y: &[f64]) -> Result<f64, NlpError> {
        Ok(y.iter()
            .zip(self.risk.iter().zip(&self.reward))
            .map(|(v, (w, r))| 0.5 * w * v * v - r * v)
            .sum())
    }
    fn gradient(&self, y: &[f64]) -> Result<Vec<f64>, NlpError> {
        Ok(y.iter()
            .zip(self.risk.iter().zip(&self.reward))
            .map(|(v, (w, r))| w * v - r)
            .collect())
    }
    fn constraints(&self, y: &[f64]) -> Result<Vec<f64>, NlpError> {
        Ok(vec![y.iter().sum::<f64>() - 1.0])
    }
    fn jacobian<'w>(&self, _y: &[f64], ws: &'w mut Self::Workspace) -> Result<&'w CscMatrix, NlpError> {
        Ok(&ws.0)
    }
    fn hessian<'w>(&self, _y: &[f64], _l: &[f64], ws: &'w mut Self::Workspace) -> Result<&'w CscMatrix, NlpError> {
        Ok(&ws.1)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Allocation::new(vec![4.0, 2.0, 1.0, 8.0, 3.0], vec![0.5, 0.2, 0.1, 1.5, -0.4]);
    let r = solve_problem(&problem, &IpmOptions::default(), "allocation", &mut NoObserver)?;
    println!(
        "{:?} after {} Newton steps, objective {:.8}",
        r.status, r.iterations, r.objective
    );
    for (i, v) in r.y.iter().enumerate() {
        println!("  asset {i}: {v:.6}");
    }
    println!("budget multiplier {:.6}", r.lambda[0]);
    Ok(())
}
