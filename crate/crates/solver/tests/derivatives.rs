//! Finite-difference oracles for every assembled derivative: objective
//! gradient, equality and inequality Jacobians, and the Hessian of the
//! Lagrangian. These guard the hand-written polar power flow calculus.

use opflab_grid::parse_matpower;
use opflab_solver::problem::OPFProblem;
use opflab_solver::{assemble, linalg::SymMat};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> OPFProblem {
    let path = format!("{}/../../cases/{}", env!("CARGO_MANIFEST_DIR"), name);
    let case = parse_matpower(&std::fs::read_to_string(path).unwrap()).unwrap();
    assemble(&case).unwrap()
}

/// Random interior point near the flat start.
fn random_point(problem: &OPFProblem, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut y = problem.flat_start();
    for (k, v) in y.iter_mut().enumerate() {
        let scale = if k < problem.n_bus { 0.2 } else { 0.05 };
        *v += rng.gen_range(-scale..scale);
    }
    y
}

fn check_rows<F>(problem: &OPFProblem, y: &[f64], rows: &[(usize, Vec<(usize, f64)>)], eval: F)
where
    F: Fn(&[f64], usize) -> f64,
{
    let h = 1e-6;
    for &(row_idx, ref row) in rows {
        let dense: std::collections::HashMap<usize, f64> = row.iter().copied().collect();
        for col in 0..problem.n_vars() {
            let mut yp = y.to_vec();
            yp[col] += h;
            let mut ym = y.to_vec();
            ym[col] -= h;
            let fd = (eval(&yp, row_idx) - eval(&ym, row_idx)) / (2.0 * h);
            let analytic = dense.get(&col).copied().unwrap_or(0.0);
            let err = (fd - analytic).abs();
            let tol = 1e-5 * analytic.abs().max(1.0);
            assert!(
                err <= tol,
                "row {row_idx} col {col}: analytic {analytic} vs fd {fd}"
            );
        }
    }
}

#[test]
fn objective_gradient_matches_finite_differences() {
    for name in ["case2.m", "case4.m"] {
        let problem = load(name);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let y = random_point(&problem, &mut rng);
            let grad = problem.objective_gradient(&y);
            let h = 1e-6;
            for col in 0..problem.n_vars() {
                let mut yp = y.clone();
                yp[col] += h;
                let mut ym = y.clone();
                ym[col] -= h;
                let fd = (problem.objective(&yp) - problem.objective(&ym)) / (2.0 * h);
                assert!(
                    (fd - grad[col]).abs() <= 1e-4 * grad[col].abs().max(1.0),
                    "{name} col {col}: {} vs {}",
                    grad[col],
                    fd
                );
            }
        }
    }
}

#[test]
fn equality_jacobian_matches_finite_differences() {
    for name in ["case2.m", "case4.m"] {
        let problem = load(name);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let y = random_point(&problem, &mut rng);
            let jac = problem.eq_jacobian(&y);
            let rows: Vec<_> = jac.into_iter().enumerate().collect();
            check_rows(&problem, &y, &rows, |yy, i| problem.eq_constraints(yy)[i]);
        }
    }
}

#[test]
fn inequality_jacobian_matches_finite_differences() {
    for name in ["case2.m", "case4.m"] {
        let problem = load(name);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let y = random_point(&problem, &mut rng);
            let rows: Vec<_> = (0..problem.n_ineq)
                .map(|j| (j, problem.ineq_jacobian_row(&y, j)))
                .collect();
            check_rows(&problem, &y, &rows, |yy, j| problem.ineq_value(yy, j));
        }
    }
}

#[test]
fn lagrangian_hessian_matches_finite_differences() {
    for name in ["case2.m", "case4.m"] {
        let problem = load(name);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = problem.n_vars();
        for _ in 0..5 {
            let y = random_point(&problem, &mut rng);
            let lambda: Vec<f64> = (0..problem.n_eq).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mu: Vec<f64> = (0..problem.n_ineq).map(|_| rng.gen_range(0.0..2.0)).collect();
            let hess = problem.lagrangian_hessian(&y, &lambda, &mu, None);
            assert_symmetric(&hess);

            let lagr_grad = |yy: &[f64]| -> Vec<f64> {
                let mut g = problem.objective_gradient(yy);
                for (row, &l) in problem.eq_jacobian(yy).iter().zip(&lambda) {
                    for &(c, v) in row {
                        g[c] -= v * l;
                    }
                }
                for (j, &m) in mu.iter().enumerate() {
                    for &(c, v) in &problem.ineq_jacobian_row(yy, j) {
                        g[c] -= v * m;
                    }
                }
                g
            };

            let h = 1e-5;
            for col in 0..n {
                let mut yp = y.clone();
                yp[col] += h;
                let mut ym = y.clone();
                ym[col] -= h;
                let gp = lagr_grad(&yp);
                let gm = lagr_grad(&ym);
                for row in 0..n {
                    let fd = (gp[row] - gm[row]) / (2.0 * h);
                    let analytic = hess.at(row, col);
                    assert!(
                        (fd - analytic).abs() <= 1e-4 * analytic.abs().max(1.0),
                        "{name} H[{row},{col}]: analytic {analytic} vs fd {fd}"
                    );
                }
            }
        }
    }
}

fn assert_symmetric(h: &SymMat) {
    for i in 0..h.n {
        for j in 0..i {
            assert_eq!(h.at(i, j), h.at(j, i), "asymmetry at ({i},{j})");
        }
    }
}
