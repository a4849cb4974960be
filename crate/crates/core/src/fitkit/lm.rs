//! Damped Gauss–Newton (Levenberg–Marquardt) with Jacobi column scaling.

use nalgebra::{DMatrix, DVector};

pub trait Residuals {
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, params: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative step size below which the fit is converged.
    pub xtol: f64,
    /// Relative cost decrease below which the fit is converged.
    pub ftol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            xtol: 1e-12,
            ftol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(JᵀJ)⁻¹` at the solution, if invertible.
    pub jtj_inverse: Option<DMatrix<f64>>,
    pub n_residuals: usize,
}

impl LmReport {
    /// Parameter covariance `s² (JᵀJ)⁻¹` with `s² = SSR / (m − n)`.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let dof = self.n_residuals.checked_sub(self.params.len())?;
        if dof == 0 {
            return None;
        }
        let s2 = self.residual_norm * self.residual_norm / dof as f64;
        self.jtj_inverse.as_ref().map(|m| m * s2)
    }

    pub fn stderr(&self) -> Vec<f64> {
        match self.covariance() {
            Some(c) => (0..c.nrows()).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
            None => vec![f64::NAN; self.params.len()],
        }
    }
}

pub fn minimize<P: Residuals>(problem: &P, initial: DVector<f64>, opts: &LmOptions) -> LmReport {
    let mut p = initial;
    let mut r = problem.residuals(&p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = cost == 0.0;
    let mut iterations = 0;
    let n = p.len();

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let j = problem.jacobian(&p);
        let scale = DVector::from_iterator(
            n,
            j.column_iter().map(|c| {
                let s = c.norm();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            }),
        );
        let js = DMatrix::from_fn(j.nrows(), n, |i, k| j[(i, k)] / scale[k]);
        let a = js.transpose() * &js;
        let g = js.transpose() * &r;

        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-30);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step_s = chol.solve(&(-&g));
            let step = step_s.component_div(&scale);
            let trial = &p + &step;
            let r_trial = problem.residuals(&trial);
            let cost_trial = r_trial.norm_squared();
            if cost_trial.is_finite() && cost_trial < cost {
                // scaled norms, so parameters sitting at zero do not stall the test
                let size = trial.component_mul(&scale).norm();
                let small_step = step_s.norm() <= opts.xtol * (size + opts.xtol);
                let small_gain = cost - cost_trial <= opts.ftol * cost;
                p = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                converged = small_step || small_gain || cost == 0.0;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at any damping: stationary point
            converged = true;
        }
    }

    let j = problem.jacobian(&p);
    let jtj_inverse = (j.transpose() * &j).try_inverse();
    LmReport {
        params: p,
        residual_norm: cost.sqrt(),
        iterations,
        converged,
        jtj_inverse,
        n_residuals: r.len(),
    }
}
