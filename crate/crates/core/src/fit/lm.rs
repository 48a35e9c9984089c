//! Projected Levenberg-Marquardt for small dense problems.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{solve, RealMatrix};

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when a step changes no parameter by more than this (relative).
    pub xtol: f64,
    /// Stop when an accepted step lowers the cost by less than this
    /// fraction.
    pub ftol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            xtol: 1e-15,
            ftol: 1e-16,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `|r(p)|^2`. `eval` fills the residual vector and the Jacobian
/// (`residuals x params`); `project` maps a trial point back into the
/// feasible set.
pub fn levenberg_marquardt(
    initial: &[f64],
    n_residuals: usize,
    mut eval: impl FnMut(&[f64], &mut [f64], &mut RealMatrix),
    project: impl Fn(&mut [f64]),
    opts: &LmOptions,
) -> LmOutcome {
    let np = initial.len();
    let mut p = initial.to_vec();
    project(&mut p);
    let mut r = vec![0.0; n_residuals];
    let mut jac = RealMatrix::zeros(n_residuals, np);
    eval(&p, &mut r, &mut jac);
    let mut cost = sum_sq(&r);
    let mut trial_r = vec![0.0; n_residuals];
    let mut trial_j = RealMatrix::zeros(n_residuals, np);
    let mut mu: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let a = jt.matmul(&jac);
        let g = jt.mul_vec(&r);
        if g.iter().all(|x| x.abs() <= f64::MIN_POSITIVE) || !cost.is_finite() {
            converged = cost.is_finite();
            break;
        }
        let dmax = (0..np).map(|i| a[(i, i)]).fold(0.0, f64::max);
        let floor = (dmax * 1e-12).max(f64::MIN_POSITIVE);
        let lambda = *mu.get_or_insert(1e-3);
        let mut accepted = false;
        let mut damping = lambda;
        for _ in 0..60 {
            let mut lhs = a.clone();
            for i in 0..np {
                lhs[(i, i)] += damping * a[(i, i)].max(floor);
            }
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let Ok(step) = solve(&lhs, &neg_g) else {
                damping *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(&step).map(|(x, s)| x + s).collect();
            project(&mut trial);
            eval(&trial, &mut trial_r, &mut trial_j);
            let trial_cost = sum_sq(&trial_r);
            if trial_cost.is_finite() && trial_cost <= cost {
                let moved = p
                    .iter()
                    .zip(&trial)
                    .all(|(x, t)| (x - t).abs() <= opts.xtol * (x.abs() + opts.xtol));
                let gain = cost - trial_cost;
                p = trial;
                core::mem::swap(&mut r, &mut trial_r);
                core::mem::swap(&mut jac, &mut trial_j);
                let previous = cost;
                cost = trial_cost;
                mu = Some((damping * 0.3).max(1e-15));
                accepted = true;
                if moved || gain <= opts.ftol * previous {
                    converged = true;
                }
                break;
            }
            damping *= 4.0;
            if damping > 1e30 {
                break;
            }
        }
        if !accepted {
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    LmOutcome {
        params: p,
        cost,
        iterations,
        converged,
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let out = levenberg_marquardt(
            &[-1.2, 1.0],
            2,
            |p, r, j| {
                r[0] = 10.0 * (p[1] - p[0] * p[0]);
                r[1] = 1.0 - p[0];
                j[(0, 0)] = -20.0 * p[0];
                j[(0, 1)] = 10.0;
                j[(1, 0)] = -1.0;
                j[(1, 1)] = 0.0;
            },
            |_| {},
            &LmOptions::default(),
        );
        assert!(out.converged);
        assert!((out.params[0] - 1.0).abs() < 1e-8 && (out.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn projection_is_respected() {
        let out = levenberg_marquardt(
            &[0.5],
            1,
            |p, r, j| {
                r[0] = p[0] - 2.0;
                j[(0, 0)] = 1.0;
            },
            |p| p[0] = p[0].min(1.0),
            &LmOptions::default(),
        );
        assert!((out.params[0] - 1.0).abs() < 1e-12);
    }
}
