//! Primal-dual interior point method with a monotone barrier schedule.
//!
//! Slack form: minimize f(y) - gamma * sum ln s subject to c_E(y) = 0 and
//! c_I(y) - s = 0. Each iteration eliminates the slack and inequality-dual
//! blocks, solves the symmetric indefinite reduced KKT system by LDL^T,
//! and applies fraction-to-boundary steps. The barrier parameter shrinks
//! by a fixed factor whenever the iterate is centered on the current
//! barrier problem (barrier KKT error below kappa * gamma). Inertia-based
//! regularization handles the non-convexity of the power flow manifold.

use std::time::Instant;

use crate::linalg::{norm_inf, LdltFactor, SymMat};
use crate::problem::OPFProblem;
use crate::solution::{OPFSolution, SolveStatus, TraceRow};
use crate::{Result, SolverError};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Convergence tolerance on scaled KKT residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial barrier parameter.
    pub gamma0: f64,
    /// Barrier reduction factor applied when centrality is met.
    pub gamma_shrink: f64,
    /// Centrality threshold: reduce gamma once barrier error <= kappa * gamma.
    pub kappa: f64,
    /// Floor applied to initial slacks.
    pub slack_floor: f64,
    /// Keep a per-iteration trace on the solution.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 200,
            gamma0: 0.1,
            gamma_shrink: 0.2,
            kappa: 10.0,
            slack_floor: 1e-3,
            trace: false,
        }
    }
}

/// The OPF operator: solve `problem` from `y0` (flat start when `None`)
/// with an optional subset of enforced inequalities (the reduced problem).
/// Failures to converge are reported through the solution status.
pub fn solve(
    problem: &OPFProblem,
    y0: Option<&[f64]>,
    mask: Option<&[usize]>,
    options: &SolveOptions,
) -> Result<OPFSolution> {
    let started = Instant::now();
    let n_y = problem.n_vars();
    let n_eq = problem.n_eq;

    let kept: Vec<usize> = match mask.or(problem.inequality_mask.as_deref()) {
        Some(m) => {
            let mut v = m.to_vec();
            v.sort_unstable();
            v.dedup();
            if let Some(&bad) = v.iter().find(|&&j| j >= problem.n_ineq) {
                return Err(SolverError::BadMaskIndex(bad, problem.n_ineq));
            }
            v
        }
        None => (0..problem.n_ineq).collect(),
    };
    let mut y = match y0 {
        Some(start) => {
            if start.len() != n_y {
                return Err(SolverError::BadStartDimension { got: start.len(), want: n_y });
            }
            start.to_vec()
        }
        None => problem.flat_start(),
    };

    let mut gamma = options.gamma0;
    let mut s: Vec<f64> = problem
        .ineq_values(&y, Some(&kept))
        .iter()
        .map(|&c| c.max(options.slack_floor))
        .collect();
    let mut mu: Vec<f64>;
    let mut lambda;
    if y0.is_some() {
        // Warm path: least-squares duals and a barrier level matching the
        // complementarity the starting point already has.
        let (ls_lambda, ls_mu) = least_squares_duals(problem, &y, &kept);
        lambda = ls_lambda;
        mu = ls_mu;
        let comp_init = s
            .iter()
            .zip(&mu)
            .fold(0.0f64, |w, (&sj, &mj)| w.max(sj * mj));
        gamma = comp_init.clamp(10.0 * options.tol, options.gamma0);
    } else {
        mu = s.iter().map(|&sj| gamma / sj).collect();
        lambda = vec![0.0; n_eq];
    }

    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = options.max_iter;
    let mut delta_last = 0.0;

    for iter in 0..options.max_iter {
        let grad = problem.objective_gradient(&y);
        let c_eq = problem.eq_constraints(&y);
        let j_eq = problem.eq_jacobian(&y);
        let c_in = problem.ineq_values(&y, Some(&kept));
        let j_in: Vec<_> = kept.iter().map(|&j| problem.ineq_jacobian_row(&y, j)).collect();

        // r_d = grad f - J_E' lambda - J_I' mu
        let mut r_d = grad.clone();
        for (row, &l) in j_eq.iter().zip(&lambda) {
            for &(c, v) in row {
                r_d[c] -= v * l;
            }
        }
        for (row, &m_j) in j_in.iter().zip(&mu) {
            for &(c, v) in row {
                r_d[c] -= v * m_j;
            }
        }
        let r_ineq: Vec<f64> = c_in.iter().zip(&s).map(|(c, sj)| c - sj).collect();

        let dual_scale = 1.0 + norm_inf(&lambda).max(norm_inf(&mu));
        let prim_scale = 1.0 + norm_inf(&y);
        let stationarity = norm_inf(&r_d) / dual_scale;
        let worst_violation = c_in.iter().fold(0.0f64, |w, &c| w.max(-c));
        let feasibility = norm_inf(&c_eq).max(worst_violation).max(norm_inf(&r_ineq)) / prim_scale;
        // Complementarity is held to an absolute tolerance so inactive
        // multipliers land well under the binding rule's threshold.
        let comp0 = s
            .iter()
            .zip(&mu)
            .fold(0.0f64, |w, (&sj, &mj)| w.max((sj * mj).abs()));

        if options.trace {
            trace.push(TraceRow {
                iteration: iter,
                barrier: gamma,
                stationarity,
                feasibility,
                complementarity: comp0,
                objective: problem.objective(&y),
                step_primal: 0.0,
                step_dual: 0.0,
            });
        }

        if stationarity <= options.tol && feasibility <= options.tol && comp0 <= options.tol {
            status = SolveStatus::Optimal;
            iterations = iter;
            break;
        }

        // Reduce the barrier while the iterate stays centered for it,
        // with a superlinear tail once gamma is small.
        let gamma_floor = options.tol / 100.0;
        for _ in 0..40 {
            let comp_gamma = s
                .iter()
                .zip(&mu)
                .fold(0.0f64, |w, (&sj, &mj)| w.max((sj * mj - gamma).abs()));
            let barrier_err = stationarity.max(feasibility).max(comp_gamma);
            if barrier_err > options.kappa * gamma || gamma <= gamma_floor {
                break;
            }
            gamma = (gamma * options.gamma_shrink).min(gamma.powf(1.5)).max(gamma_floor);
        }

        // Reduced KKT system over (dy, -dlambda).
        let hess = problem.lagrangian_hessian(&y, &lambda, &mu, Some(&kept));
        let dim = n_y + n_eq;
        let mut rhs = vec![0.0; dim];
        for c in 0..n_y {
            rhs[c] = -r_d[c];
        }
        for (i, &ci) in c_eq.iter().enumerate() {
            rhs[n_y + i] = -ci;
        }
        // rhs_y -= J_I' (r_C + mu * r_I) / s, with r_C = s mu - gamma.
        for ((row, &sj), (&mj, &rj)) in
            j_in.iter().zip(&s).zip(mu.iter().zip(&r_ineq))
        {
            let coeff = (sj * mj - gamma + mj * rj) / sj;
            for &(c, v) in row {
                rhs[c] -= v * coeff;
            }
        }

        let mut base = SymMat::zeros(dim);
        // H block.
        for i in 0..n_y {
            for j in i..n_y {
                let v = hess.at(i, j);
                if v != 0.0 {
                    base.set(i, j, v);
                }
            }
        }
        // Sigma = mu / s condensed onto the H block.
        for (row, (&sj, &mj)) in j_in.iter().zip(s.iter().zip(&mu)) {
            let sigma = mj / sj;
            for (a, &(ca, va)) in row.iter().enumerate() {
                for &(cb, vb) in &row[a..] {
                    base.add(ca.min(cb), ca.max(cb), sigma * va * vb);
                }
            }
        }
        // Equality Jacobian block.
        for (i, row) in j_eq.iter().enumerate() {
            for &(c, v) in row {
                base.set(c, n_y + i, v);
            }
        }

        // Inertia-corrected factorization.
        let mut solved = None;
        let mut delta = 0.0;
        for attempt in 0..12 {
            let mut k = base.clone();
            if delta > 0.0 {
                for i in 0..n_y {
                    k.data[i * dim + i] += delta;
                }
                for i in n_y..dim {
                    k.data[i * dim + i] -= delta * 1e-8;
                }
            }
            let factor = LdltFactor::factor(&k);
            let inertia = factor.inertia();
            if !factor.is_singular() && inertia.pos == n_y && inertia.neg == n_eq {
                solved = Some(factor.solve(&rhs));
                delta_last = delta;
                break;
            }
            delta = if attempt == 0 {
                if delta_last > 0.0 { (delta_last / 3.0).max(1e-8) } else { 1e-6 }
            } else {
                delta * 33.0
            };
        }
        let Some(step) = solved else {
            status = SolveStatus::Numerical;
            iterations = iter;
            break;
        };
        if step.iter().any(|v| !v.is_finite()) {
            status = SolveStatus::Numerical;
            iterations = iter;
            break;
        }

        let dy = &step[0..n_y];
        let dlambda: Vec<f64> = step[n_y..].iter().map(|&v| -v).collect();
        let ds: Vec<f64> = j_in
            .iter()
            .zip(&r_ineq)
            .map(|(row, &rj)| row.iter().map(|&(c, v)| v * dy[c]).sum::<f64>() + rj)
            .collect();
        let dmu: Vec<f64> = s
            .iter()
            .zip(&mu)
            .zip(&ds)
            .map(|((&sj, &mj), &dsj)| -(sj * mj - gamma + mj * dsj) / sj)
            .collect();

        // Fraction-to-boundary step lengths.
        let tau = 0.995f64.max(1.0 - gamma);
        let mut alpha_p: f64 = 1.0;
        for (&sj, &dsj) in s.iter().zip(&ds) {
            if dsj < 0.0 {
                alpha_p = alpha_p.min(-tau * sj / dsj);
            }
        }
        let mut alpha_d: f64 = 1.0;
        for (&mj, &dmj) in mu.iter().zip(&dmu) {
            if dmj < 0.0 {
                alpha_d = alpha_d.min(-tau * mj / dmj);
            }
        }

        // Backtracking line search on the KKT residual norm; a common
        // factor scales both fraction-to-boundary capped steps.
        let phi0 = residual_merit(problem, &kept, &y, &s, &lambda, &mu, gamma);
        let mut beta = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let ap = beta * alpha_p;
            let ad = beta * alpha_d;
            let y_t: Vec<f64> = y.iter().zip(dy).map(|(&a, &d)| a + ap * d).collect();
            let s_t: Vec<f64> = s.iter().zip(&ds).map(|(&a, &d)| a + ap * d).collect();
            let l_t: Vec<f64> = lambda.iter().zip(&dlambda).map(|(&a, &d)| a + ad * d).collect();
            let m_t: Vec<f64> = mu.iter().zip(&dmu).map(|(&a, &d)| a + ad * d).collect();
            let phi = residual_merit(problem, &kept, &y_t, &s_t, &l_t, &m_t, gamma);
            if phi.is_finite() && phi <= (1.0 - 1e-4 * beta) * phi0 {
                accepted = Some((y_t, s_t, l_t, m_t, ap, ad));
                break;
            }
            beta *= 0.5;
        }
        let Some((y_t, s_t, l_t, m_t, ap, ad)) = accepted else {
            status = SolveStatus::Numerical;
            iterations = iter;
            break;
        };
        y = y_t;
        s = s_t;
        lambda = l_t;
        mu = m_t;
        if let Some(last) = trace.last_mut() {
            last.step_primal = ap;
            last.step_dual = ad;
        }
    }

    // Classify non-convergence.
    if status == SolveStatus::MaxIter {
        let c_eq = problem.eq_constraints(&y);
        let c_in = problem.ineq_values(&y, Some(&kept));
        let worst = norm_inf(&c_eq).max(c_in.iter().fold(0.0f64, |w, &c| w.max(-c)));
        if worst > 1e-4 * (1.0 + norm_inf(&y)) {
            status = SolveStatus::Infeasible;
        }
    }

    // Inflate duals back to the full enumeration.
    let mut mu_full = vec![0.0; problem.n_ineq];
    for (&j, &mj) in kept.iter().zip(&mu) {
        mu_full[j] = mj;
    }

    let active_set = binding_set(problem, &y, &mu_full);
    let objective = problem.objective(&y);

    Ok(OPFSolution {
        status,
        y_star: y,
        lambda,
        mu: mu_full,
        objective,
        active_set,
        iterations,
        wall_time: started.elapsed().as_secs_f64(),
        trace,
    })
}

/// Binding rule: slack below 1e-5 * (1 + |bound|) or multiplier above 1e-5.
pub fn binding_set(problem: &OPFProblem, y: &[f64], mu_full: &[f64]) -> Vec<usize> {
    (0..problem.n_ineq)
        .filter(|&j| {
            let slack = problem.ineq_value(y, j);
            slack <= 1e-5 * (1.0 + problem.ineq_bound(j)) || mu_full[j] >= 1e-5
        })
        .collect()
}

/// Euclidean norm of the full primal-dual residual at barrier level gamma.
fn residual_merit(
    problem: &OPFProblem,
    kept: &[usize],
    y: &[f64],
    s: &[f64],
    lambda: &[f64],
    mu: &[f64],
    gamma: f64,
) -> f64 {
    let mut acc = 0.0;
    let mut r_d = problem.objective_gradient(y);
    for (row, &l) in problem.eq_jacobian(y).iter().zip(lambda) {
        for &(c, v) in row {
            r_d[c] -= v * l;
        }
    }
    for (&j, &mj) in kept.iter().zip(mu) {
        for &(c, v) in &problem.ineq_jacobian_row(y, j) {
            r_d[c] -= v * mj;
        }
    }
    for v in &r_d {
        acc += v * v;
    }
    for v in &problem.eq_constraints(y) {
        acc += v * v;
    }
    for ((&j, &sj), &mj) in kept.iter().zip(s).zip(mu) {
        let ri = problem.ineq_value(y, j) - sj;
        let rc = sj * mj - gamma;
        acc += ri * ri + rc * rc;
    }
    acc.sqrt()
}

/// Least-squares multipliers at a warm-start point: minimize
/// |grad f - J_E' lambda - J_N' mu| over the equality duals and the
/// multipliers of near-active inequalities (others start at a nominal
/// small value).
fn least_squares_duals(
    problem: &OPFProblem,
    y: &[f64],
    kept: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    const MU_NOMINAL: f64 = 1e-8;
    let n_eq = problem.n_eq;
    let near: Vec<usize> = kept
        .iter()
        .copied()
        .filter(|&j| problem.ineq_value(y, j) <= 1e-3 * (1.0 + problem.ineq_bound(j)))
        .collect();

    let mut rows: Vec<Vec<(usize, f64)>> = problem.eq_jacobian(y);
    for &j in &near {
        rows.push(problem.ineq_jacobian_row(y, j));
    }
    let q = rows.len();
    let grad = problem.objective_gradient(y);

    // Normal equations on the constraint Gram matrix, lightly ridged.
    let mut gram = SymMat::zeros(q);
    for i in 0..q {
        for j in i..q {
            let mut acc = if i == j { 1e-10 } else { 0.0 };
            // Sparse dot of rows i and j.
            let (ri, rj) = (&rows[i], &rows[j]);
            let mut a = 0;
            let mut b = 0;
            while a < ri.len() && b < rj.len() {
                match ri[a].0.cmp(&rj[b].0) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        acc += ri[a].1 * rj[b].1;
                        a += 1;
                        b += 1;
                    }
                }
            }
            gram.set(i, j, acc);
        }
    }
    let rhs: Vec<f64> = rows
        .iter()
        .map(|row| row.iter().map(|&(c, v)| v * grad[c]).sum())
        .collect();
    let z = LdltFactor::factor(&gram).solve(&rhs);

    let lambda = z[0..n_eq].to_vec();
    let mut mu = vec![MU_NOMINAL; kept.len()];
    for (pos, &j) in near.iter().enumerate() {
        let local = kept.binary_search(&j).expect("near subset of kept");
        mu[local] = z[n_eq + pos].max(MU_NOMINAL);
    }
    (lambda, mu)
}
