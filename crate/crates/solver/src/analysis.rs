//! KKT-level analysis: violations, residual norms and nodal prices.
//! Everything here re-evaluates the assembled problem functions and is
//! independent of the solver's internal iterates.

use serde::{Deserialize, Serialize};

use crate::linalg::norm_inf;
use crate::problem::OPFProblem;
use crate::solution::OPFSolution;
use crate::{Result, SolverError, EPS_VIOLATION};

/// Global indices of all inequalities violated beyond `EPS_VIOLATION`.
pub fn violated(problem: &OPFProblem, y: &[f64]) -> Result<Vec<usize>> {
    if y.len() != problem.n_vars() {
        return Err(SolverError::BadDimension { got: y.len(), want: problem.n_vars() });
    }
    Ok((0..problem.n_ineq)
        .filter(|&j| problem.ineq_value(y, j) < -EPS_VIOLATION)
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KktResiduals {
    /// |grad f - J_E' lambda - J_I' mu|_inf / (1 + max dual norm)
    pub stationarity: f64,
    /// max(|c_E|_inf, worst inequality violation) / (1 + |y|_inf)
    pub feasibility: f64,
    /// max_j |mu_j c_j| / (1 + max dual norm)
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.feasibility).max(self.complementarity)
    }
}

/// Scaled KKT residual norms of a candidate primal-dual point.
pub fn kkt_residuals(problem: &OPFProblem, solution: &OPFSolution) -> Result<KktResiduals> {
    let y = &solution.y_star;
    if y.len() != problem.n_vars() {
        return Err(SolverError::BadDimension { got: y.len(), want: problem.n_vars() });
    }
    if solution.mu.len() != problem.n_ineq || solution.lambda.len() != problem.n_eq {
        return Err(SolverError::BadDimension {
            got: solution.mu.len(),
            want: problem.n_ineq,
        });
    }

    let mut r_d = problem.objective_gradient(y);
    for (row, &l) in problem.eq_jacobian(y).iter().zip(&solution.lambda) {
        for &(c, v) in row {
            r_d[c] -= v * l;
        }
    }
    let mut comp = 0.0f64;
    let mut worst_violation = 0.0f64;
    for j in 0..problem.n_ineq {
        let cj = problem.ineq_value(y, j);
        let mj = solution.mu[j];
        if mj != 0.0 {
            for &(c, v) in &problem.ineq_jacobian_row(y, j) {
                r_d[c] -= v * mj;
            }
        }
        comp = comp.max((mj * cj).abs());
        worst_violation = worst_violation.max(-cj);
    }

    let dual_scale = 1.0 + norm_inf(&solution.lambda).max(norm_inf(&solution.mu));
    let prim_scale = 1.0 + norm_inf(y);
    Ok(KktResiduals {
        stationarity: norm_inf(&r_d) / dual_scale,
        feasibility: norm_inf(&problem.eq_constraints(y)).max(worst_violation) / prim_scale,
        complementarity: comp / dual_scale,
    })
}

/// Locational marginal prices: the dual of each bus's active power
/// balance, sign-normalized so added load raises cost ($ per unit
/// power-hour, on the case base).
pub fn lmp(problem: &OPFProblem, solution: &OPFSolution) -> Result<Vec<f64>> {
    if !solution.is_optimal() {
        return Err(SolverError::NotOptimal(solution.status));
    }
    // Balance residual is written P(V) - Pg + Pd, so d f*/d Pd_i = -lambda_i.
    Ok(solution.lambda[0..problem.n_bus].iter().map(|&l| -l).collect())
}
