//! Damped Gauss-Newton (Levenberg-Marquardt) least squares.
//!
//! Parameters are handled in units of caller-supplied scales so that the
//! step tolerance and finite-difference steps are meaningful when physical
//! parameters differ by many orders of magnitude.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LsqOptions {
    pub max_iterations: usize,
    /// Converged when `|step| <= step_tolerance * (|x| + step_tolerance)` in scaled units.
    pub step_tolerance: f64,
    /// Converged when the RMS residual drops below this fraction of `residual_scale`.
    pub residual_tolerance: f64,
    /// Typical size of one residual, used to make `residual_tolerance` relative.
    pub residual_scale: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-9,
            residual_tolerance: 1e-12,
            residual_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsqOutcome {
    pub params: Vec<f64>,
    /// One-sigma standard errors, zero for an exact fit.
    pub std_errors: Vec<f64>,
    /// Parameter covariance (physical units), when the normal matrix is invertible.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub residuals: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after the start and after each accepted step.
    pub cost_history: Vec<f64>,
}

impl LsqOutcome {
    pub fn residual_rms(&self) -> f64 {
        if self.residuals.is_empty() {
            0.0
        } else {
            (self.cost / self.residuals.len() as f64).sqrt()
        }
    }
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian<F>(residual: &F, u: &[f64], r0: &[f64], scales: &[f64]) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let m = r0.len();
    let mut jac = DMatrix::zeros(m, u.len());
    let mut x: Vec<f64> = u.iter().zip(scales).map(|(a, s)| a * s).collect();
    for j in 0..u.len() {
        let h = 1e-7 * u[j].abs().max(1.0);
        let orig = x[j];
        x[j] = (u[j] + h) * scales[j];
        let plus = residual(&x);
        x[j] = (u[j] - h) * scales[j];
        let minus = residual(&x);
        x[j] = orig;
        match (plus, minus) {
            (Some(p), Some(q)) => {
                for i in 0..m {
                    jac[(i, j)] = (p[i] - q[i]) / (2.0 * h);
                }
            }
            (Some(p), None) => {
                for i in 0..m {
                    jac[(i, j)] = (p[i] - r0[i]) / h;
                }
            }
            (None, Some(q)) => {
                for i in 0..m {
                    jac[(i, j)] = (r0[i] - q[i]) / h;
                }
            }
            (None, None) => return None,
        }
    }
    Some(jac)
}

/// Minimizes `sum residual(x)^2` from `x0`.
///
/// `residual` returns `None` outside its domain; such trial steps are
/// rejected like any step that fails to lower the cost. The returned outcome
/// is never an error: failure to converge within `max_iterations` is reported
/// through `converged = false`.
pub fn levenberg_marquardt<F>(
    residual: F,
    x0: &[f64],
    scales: &[f64],
    options: &LsqOptions,
) -> LsqOutcome
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    assert_eq!(x0.len(), scales.len(), "one scale per parameter");
    let n = x0.len();
    let scales: Vec<f64> = scales
        .iter()
        .zip(x0)
        .map(|(&s, &x)| if s > 0.0 { s } else { x.abs().max(1.0) })
        .collect();
    let unscale = |u: &[f64]| -> Vec<f64> { u.iter().zip(&scales).map(|(a, s)| a * s).collect() };

    let mut u: Vec<f64> = x0.iter().zip(&scales).map(|(x, s)| x / s).collect();
    let Some(mut r) = residual(x0) else {
        return LsqOutcome {
            params: x0.to_vec(),
            std_errors: vec![f64::NAN; n],
            covariance: None,
            residuals: Vec::new(),
            cost: f64::INFINITY,
            iterations: 0,
            converged: false,
            cost_history: Vec::new(),
        };
    };
    let m = r.len();
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let target = (options.residual_tolerance * options.residual_scale).powi(2) * m as f64;
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = None;

    while iterations < options.max_iterations {
        if cost <= target {
            converged = true;
            break;
        }
        iterations += 1;
        let Some(j) = jacobian(&residual, &u, &r, &scales) else {
            break;
        };
        let rv = DVector::from_column_slice(&r);
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &rv;

        // Cosine between the residual and each Jacobian column.
        let (jtj_ref, grad_ref, norm) = (&jtj, &grad, cost.sqrt());
        let orthogonal = move |tol: f64| {
            (0..n).all(|k| {
                let col = jtj_ref[(k, k)].sqrt() * norm;
                col == 0.0 || grad_ref[k].abs() <= tol * col
            })
        };
        jac = Some(j);
        if orthogonal(1e-12) {
            converged = true;
            break;
        }

        let diag_floor = 1e-15 * (0..n).map(|k| jtj[(k, k)]).fold(0.0, f64::max);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(diag_floor);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            let Some(r_trial) = residual(&unscale(&trial)) else {
                lambda *= 10.0;
                continue;
            };
            let c_trial = cost_of(&r_trial);
            if c_trial < cost {
                let unorm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                let small =
                    step.norm() <= options.step_tolerance * (unorm + options.step_tolerance);
                u = trial;
                r = r_trial;
                cost = c_trial;
                history.push(cost);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            jac = jacobian(&residual, &u, &r, &scales);
            break;
        }
        if !accepted {
            // No descent survives rounding; a minimum only if nearly stationary.
            converged = orthogonal(1e-6);
            break;
        }
    }
    if converged && jac.is_none() {
        jac = jacobian(&residual, &u, &r, &scales);
    }

    let covariance = match (&jac, m > n) {
        _ if cost <= target => Some(vec![vec![0.0; n]; n]),
        (Some(j), true) => {
            let s2 = cost / (m - n) as f64;
            (j.transpose() * j).try_inverse().map(|inv| {
                (0..n)
                    .map(|a| {
                        (0..n)
                            .map(|b| s2 * inv[(a, b)] * scales[a] * scales[b])
                            .collect()
                    })
                    .collect::<Vec<Vec<f64>>>()
            })
        }
        _ => None,
    };
    let std_errors = match &covariance {
        Some(c) => (0..n).map(|k| c[k][k].max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; n],
    };

    LsqOutcome {
        params: unscale(&u),
        std_errors,
        covariance,
        residuals: r,
        cost,
        iterations,
        converged,
        cost_history: history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&t| 3.0 * (-1.7 * t).exp() + 0.5).collect();
        let res = |p: &[f64]| {
            Some(
                t.iter()
                    .zip(&y)
                    .map(|(&t, &y)| p[0] * (-p[1] * t).exp() + p[2] - y)
                    .collect(),
            )
        };
        let out = levenberg_marquardt(
            res,
            &[1.0, 1.0, 0.0],
            &[1.0, 1.0, 1.0],
            &LsqOptions::default(),
        );
        assert!(out.converged);
        assert_relative_eq!(out.params[0], 3.0, max_relative = 1e-8);
        assert_relative_eq!(out.params[1], 1.7, max_relative = 1e-8);
        assert_relative_eq!(out.params[2], 0.5, max_relative = 1e-8);
        assert!(out.cost_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rosenbrock_in_hz_units() {
        let s = 1e9;
        let res = |p: &[f64]| {
            let (x, y) = (p[0] / s, p[1] / s);
            Some(vec![10.0 * (y - x * x), 1.0 - x])
        };
        let out = levenberg_marquardt(res, &[-1.2e9, 1e9], &[s, s], &LsqOptions::default());
        assert!(out.converged);
        assert_relative_eq!(out.params[0], 1e9, max_relative = 1e-7);
        assert_relative_eq!(out.params[1], 1e9, max_relative = 1e-7);
        assert_eq!(out.std_errors, vec![0.0, 0.0]);
    }

    #[test]
    fn iteration_cap_reports_divergence() {
        let res = |p: &[f64]| Some(vec![p[0].sin() + 2.0]);
        let options = LsqOptions {
            max_iterations: 3,
            ..LsqOptions::default()
        };
        let out = levenberg_marquardt(res, &[0.3], &[1.0], &options);
        assert!(out.iterations <= 3);
        assert!(out.cost.is_finite());
    }

    #[test]
    fn out_of_domain_start() {
        let out = levenberg_marquardt(|_: &[f64]| None, &[1.0], &[1.0], &LsqOptions::default());
        assert!(!out.converged);
        assert_eq!(out.iterations, 0);
    }
}
