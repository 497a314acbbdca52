// SPDX-License-Identifier: Apache-2.0

//! Levenberg-Marquardt least squares.
//!
//! Minimises `0.5 * |r(p)|^2` with Marquardt's diagonal damping `J^T J + lambda diag(J^T J)`,
//! which makes the iteration invariant to parameter scaling. A step is accepted only when the
//! cost decreases. The fit is declared converged when both the scaled relative step and the
//! relative cost decrease fall below [`REL_TOL`], or when no damping level yields a decrease
//! and the Gauss-Newton model predicts no further gain at machine precision.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REL_TOL: f64 = 1e-10;
pub const MAX_ITER: usize = 200;

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

/// A residual vector with an optional analytic Jacobian.
pub trait LeastSquares {
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64>;

    /// Analytic Jacobian `d r_i / d p_j`; `None` falls back to central differences.
    fn jacobian(&self, _params: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

/// Adapter turning a closure into a [`LeastSquares`] problem without an analytic Jacobian.
pub struct FnProblem<F>(pub F);

impl<F> LeastSquares for FnProblem<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64> {
        (self.0)(params)
    }
}

/// Central-difference Jacobian.
pub fn numeric_jacobian<P: LeastSquares + ?Sized>(
    problem: &P,
    params: &DVector<f64>,
) -> DMatrix<f64> {
    let m = problem.residuals(params).len();
    let n = params.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut p = params.clone();
    for j in 0..n {
        let h = f64::EPSILON.cbrt() * params[j].abs().max(1e-8);
        p[j] = params[j] + h;
        let up = problem.residuals(&p);
        p[j] = params[j] - h;
        let down = problem.residuals(&p);
        p[j] = params[j];
        let col = (up - down) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squared residuals.
    pub chi2: f64,
    pub n_residuals: usize,
}

impl FitResult {
    pub fn with_names(mut self, names: &[&str]) -> Self {
        self.names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.params[i])
    }

    pub fn error(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.std_errors[i])
    }

    pub fn rms(&self) -> f64 {
        (self.chi2 / self.n_residuals.max(1) as f64).sqrt()
    }
}

fn jacobian_of<P: LeastSquares + ?Sized>(problem: &P, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let j = problem
        .jacobian(x)
        .unwrap_or_else(|| numeric_jacobian(problem, x));
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(j)
}

fn damped_step(a: &DMatrix<f64>, g: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = a.nrows();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] += lambda * a[(i, i)].max(1e-12 * max_diag).max(f64::MIN_POSITIVE);
    }
    m.cholesky().map(|c| -c.solve(g))
}

/// Runs Levenberg-Marquardt from `init`.
///
/// Returns [`Error::NonFinite`] if the residuals at `init` are not finite and
/// [`Error::Singular`] if the normal equations cannot be factorised at any damping.
pub fn lm_minimize<P: LeastSquares + ?Sized>(problem: &P, init: &[f64]) -> Result<FitResult> {
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial parameters must be finite"));
    }
    let mut x = DVector::from_column_slice(init);
    let mut r = problem.residuals(&x);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = x.len();
    let m = r.len();
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = LAMBDA_INIT;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jac = jacobian_of(problem, &x)?;
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() == 0.0 {
            converged = true;
            break;
        }
        let scale = DVector::from_iterator(n, (0..n).map(|i| a[(i, i)].sqrt()));

        let mut accepted = false;
        let mut factorised = false;
        while lambda <= LAMBDA_MAX {
            let Some(step) = damped_step(&a, &g, lambda) else {
                lambda *= 10.0;
                continue;
            };
            factorised = true;
            let x_new = &x + &step;
            let r_new = problem.residuals(&x_new);
            let cost_new = 0.5 * r_new.norm_squared();
            if cost_new.is_finite() && cost_new < cost {
                let rel_dec = (cost - cost_new) / cost;
                let rel_step = step.component_mul(&scale).norm()
                    / x_new.component_mul(&scale).norm().max(f64::MIN_POSITIVE);
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel_dec < REL_TOL && rel_step < REL_TOL {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            if !factorised {
                return Err(Error::Singular);
            }
            // No damping level decreases the cost: stationary if the undamped model predicts
            // a negligible gain or a step below the resolution of the parameters.
            converged = match damped_step(&a, &g, 1e-12) {
                Some(step) => {
                    let predicted = -(g.dot(&step)) - 0.5 * step.dot(&(&a * &step));
                    let rel_step = step.component_mul(&scale).norm()
                        / x.component_mul(&scale).norm().max(f64::MIN_POSITIVE);
                    predicted <= 1e-8 * cost + f64::MIN_POSITIVE || rel_step <= 1e-8
                }
                None => true,
            };
            break;
        }
    }

    let jac = jacobian_of(problem, &x)?;
    let a = jac.transpose() * &jac;
    let chi2 = 2.0 * cost;
    let s2 = if m > n { chi2 / (m - n) as f64 } else { 0.0 };
    let inv = a
        .clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| {
            a.pseudo_inverse(1e-14)
                .unwrap_or_else(|_| DMatrix::zeros(n, n))
        });
    let mut cov = inv * s2;
    cov = (&cov + cov.transpose()) * 0.5;
    let std_errors = (0..n).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    Ok(FitResult {
        names: (0..n).map(|i| format!("p{i}")).collect(),
        params: x.iter().copied().collect(),
        std_errors,
        covariance: (0..n)
            .map(|i| (0..n).map(|j| cov[(i, j)]).collect())
            .collect(),
        iterations,
        converged,
        chi2,
        n_residuals: m,
    })
}
