//! Damped (Levenberg-Marquardt) nonlinear least squares.
//!
//! The Jacobian is taken by central differences in scaled parameters, where
//! each parameter is divided by its `scale`. Box bounds are enforced by
//! projecting trial points onto the box.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, FitFailure, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameter {
    pub value: f64,
    /// Typical magnitude of a meaningful change; differences are taken in units of it.
    pub scale: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Parameter {
    pub fn free(value: f64, scale: f64) -> Self {
        Self {
            value,
            scale,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn bounded(value: f64, scale: f64, lower: f64, upper: f64) -> Self {
        Self {
            value: value.clamp(lower, upper),
            scale,
            lower,
            upper,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub max_iterations: usize,
    /// Converged when an accepted step lowers the cost by less than this fraction.
    pub relative_tolerance: f64,
    pub difference_step: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            relative_tolerance: 1e-10,
            difference_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub parameters: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub cost_trace: Vec<f64>,
    /// `(JᵀJ)⁻¹` in unscaled parameters; not multiplied by the residual variance.
    pub covariance: Option<DMatrix<f64>>,
}

impl Solution {
    /// Standard errors with the covariance scaled by the reduced chi-square.
    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        let cov = self.covariance.as_ref()?;
        let dof = self.residuals.len().saturating_sub(self.parameters.len());
        if dof == 0 {
            return None;
        }
        let s2 = self.cost / dof as f64;
        Some((0..cov.nrows()).map(|i| (cov[(i, i)] * s2).max(0.0).sqrt()).collect())
    }
}

struct Problem<'a, F> {
    params: &'a [Parameter],
    residuals: F,
}

impl<F> Problem<'_, F>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    fn unscale(&self, z: &DVector<f64>) -> Vec<f64> {
        z.iter().zip(self.params).map(|(v, p)| v * p.scale).collect()
    }

    fn project(&self, z: &mut DVector<f64>) {
        for (v, p) in z.iter_mut().zip(self.params) {
            *v = v.clamp(p.lower / p.scale, p.upper / p.scale);
        }
    }

    fn eval(&mut self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.unscale(z);
        let r = (self.residuals)(&x)?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite residual".into()));
        }
        Ok(DVector::from_vec(r))
    }

    fn jacobian(&mut self, z: &DVector<f64>, m: usize, h: f64) -> Result<DMatrix<f64>> {
        let n = z.len();
        let mut jac = DMatrix::zeros(m, n);
        for k in 0..n {
            let mut zp = z.clone();
            zp[k] += h;
            let rp = self.eval(&zp)?;
            let mut zm = z.clone();
            zm[k] -= h;
            let rm = self.eval(&zm)?;
            let col = (rp - rm) / (2.0 * h);
            jac.set_column(k, &col);
        }
        Ok(jac)
    }
}

fn solve_damped(jtj: &DMatrix<f64>, g: &DVector<f64>, mu: f64) -> Option<DVector<f64>> {
    let n = jtj.nrows();
    let max_diag = (0..n).map(|i| jtj[(i, i)]).fold(0.0f64, f64::max).max(1e-300);
    let mut a = jtj.clone();
    for i in 0..n {
        a[(i, i)] += mu * jtj[(i, i)].max(1e-12 * max_diag);
    }
    let rhs = -g;
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(&rhs));
    }
    a.svd(true, true).solve(&rhs, 1e-15).ok()
}

/// Minimizes the sum of squared residuals over the parameters.
pub fn minimize<F>(params: &[Parameter], settings: &Settings, residuals: F) -> Result<Solution>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if params.iter().any(|p| !(p.scale > 0.0) || !p.value.is_finite()) {
        return Err(Error::InvalidInput("parameters need finite values and positive scales".into()));
    }
    let mut problem = Problem { params, residuals };
    let mut z = DVector::from_iterator(params.len(), params.iter().map(|p| p.value / p.scale));
    problem.project(&mut z);
    let mut r = problem.eval(&z)?;
    let m = r.len();
    if m < params.len() {
        return Err(Error::InvalidInput(format!(
            "{} residuals cannot determine {} parameters",
            m,
            params.len()
        )));
    }
    let mut cost = r.norm_squared();
    let mut trace = vec![cost];
    let mut mu = 1e-3;
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < settings.max_iterations {
        iterations += 1;
        let jac = problem.jacobian(&z, m, settings.difference_step)?;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() == 0.0 {
            converged = true;
            break;
        }
        loop {
            let Some(step) = solve_damped(&jtj, &g, mu) else {
                mu *= 10.0;
                if mu > 1e20 {
                    converged = true;
                    break;
                }
                continue;
            };
            let mut trial = &z + &step;
            problem.project(&mut trial);
            let moved = (&trial - &z).amax();
            if moved <= 1e-15 * z.amax().max(1.0) {
                converged = true;
                break;
            }
            // a failed evaluation counts as a rejected step
            if let Ok(rt) = problem.eval(&trial) {
                let ct = rt.norm_squared();
                if ct < cost {
                    let rel = (cost - ct) / cost;
                    z = trial;
                    r = rt;
                    cost = ct;
                    trace.push(cost);
                    mu = (mu / 3.0).max(1e-12);
                    if rel < settings.relative_tolerance || cost == 0.0 {
                        converged = true;
                    }
                    break;
                }
            }
            mu *= 4.0;
            if mu > 1e20 {
                // No step lowers the cost: the current point is a minimum to working precision.
                converged = true;
                break;
            }
        }
    }

    let parameters = problem.unscale(&z);
    if !converged {
        return Err(FitFailure {
            reason: format!("no convergence after {} iterations", settings.max_iterations),
            best_parameters: parameters,
            best_cost: cost,
            cost_trace: trace,
        }
        .into());
    }

    let covariance = problem.jacobian(&z, m, settings.difference_step).ok().and_then(|jac| {
        let jtj = jac.transpose() * jac;
        jtj.try_inverse().map(|inv| {
            DMatrix::from_fn(params.len(), params.len(), |i, j| {
                inv[(i, j)] * params[i].scale * params[j].scale
            })
        })
    });

    Ok(Solution {
        parameters,
        residuals: r.iter().copied().collect(),
        cost,
        iterations,
        cost_trace: trace,
        covariance,
    })
}
