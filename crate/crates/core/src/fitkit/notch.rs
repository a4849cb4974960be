//! Side-coupled (notch) resonator transmission
//!
//! `S21(f) = 1 − (Q_l/|Q_c|) e^{iφ} / (1 + 2i Q_l (f − f0)/f0)`
//!
//! with `1/Q_l = 1/Q_i + cos φ / |Q_c|`. Frequencies in GHz.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmOptions, Residuals};
use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 50;
pub const MIN_LINEWIDTHS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotchModel {
    pub f0: f64,
    pub q_loaded: f64,
    /// |Q_c|
    pub q_coupling: f64,
    pub phi: f64,
}

impl NotchModel {
    /// Model with the given internal and coupling quality factors.
    pub fn from_quality(f0: f64, q_internal: f64, q_coupling: f64, phi: f64) -> Self {
        let q_loaded = 1.0 / (1.0 / q_internal + phi.cos() / q_coupling);
        Self {
            f0,
            q_loaded,
            q_coupling,
            phi,
        }
    }

    pub fn inverse_q_internal(&self) -> f64 {
        1.0 / self.q_loaded - self.phi.cos() / self.q_coupling
    }

    pub fn q_internal(&self) -> f64 {
        1.0 / self.inverse_q_internal()
    }

    pub fn linewidth(&self) -> f64 {
        self.f0 / self.q_loaded
    }
}

pub fn notch_s21(f: f64, m: &NotchModel) -> Complex64 {
    let x = (f - m.f0) / m.f0;
    let d = Complex64::new(1.0, 2.0 * m.q_loaded * x);
    Complex64::new(1.0, 0.0) - Complex64::from_polar(m.q_loaded / m.q_coupling, m.phi) / d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotchStderr {
    pub f0: f64,
    pub q_loaded: f64,
    pub q_internal: f64,
    pub q_coupling: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotchFitResult {
    pub f0: f64,
    pub q_loaded: f64,
    pub q_internal: f64,
    pub q_coupling: f64,
    pub phi: f64,
    pub stderr: NotchStderr,
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Per-component noise estimated from second differences of the data.
    pub noise_estimate: f64,
    pub diagnostics: Vec<String>,
}

impl NotchFitResult {
    pub fn model(&self) -> NotchModel {
        NotchModel {
            f0: self.f0,
            q_loaded: self.q_loaded,
            q_coupling: self.q_coupling,
            phi: self.phi,
        }
    }
}

struct NotchProblem<'a> {
    sweep: &'a [(f64, Complex64)],
}

// params: [f0, ln Q_l, ln Q_c, φ]
impl Residuals for NotchProblem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let m = NotchModel {
            f0: p[0],
            q_loaded: p[1].exp(),
            q_coupling: p[2].exp(),
            phi: p[3],
        };
        let mut r = DVector::zeros(2 * self.sweep.len());
        for (i, (f, s)) in self.sweep.iter().enumerate() {
            let d = notch_s21(*f, &m) - s;
            r[2 * i] = d.re;
            r[2 * i + 1] = d.im;
        }
        r
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let (f0, ql, qc, phi) = (p[0], p[1].exp(), p[2].exp(), p[3]);
        let i = Complex64::i();
        let rot = Complex64::from_polar(1.0, phi);
        let mut j = DMatrix::zeros(2 * self.sweep.len(), 4);
        for (k, (f, _)) in self.sweep.iter().enumerate() {
            let x = (f - f0) / f0;
            let d = Complex64::new(1.0, 2.0 * ql * x);
            let g = rot * (ql / qc) / d;
            let cols = [
                // ∂D/∂f0 = −2i Q_l f/f0²
                rot * (ql / qc) * (-2.0 * i * ql * f / (f0 * f0)) / (d * d),
                -rot * (ql / qc) / (d * d),
                g,
                -i * g,
            ];
            for (c, v) in cols.iter().enumerate() {
                j[(2 * k, c)] = v.re;
                j[(2 * k + 1, c)] = v.im;
            }
        }
        j
    }
}

/// Algebraic (Kåsa) circle fit; returns centre and radius.
fn circle_fit(points: &[Complex64]) -> Option<(Complex64, f64)> {
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for z in points {
        let row = Vector3::new(z.re, z.im, 1.0);
        let rhs = -(z.re * z.re + z.im * z.im);
        a += row * row.transpose();
        b += row * rhs;
    }
    let sol = a.lu().solve(&b)?;
    let centre = Complex64::new(-0.5 * sol[0], -0.5 * sol[1]);
    let r2 = centre.norm_sqr() - sol[2];
    (r2 > 0.0).then(|| (centre, r2.sqrt()))
}

/// Per-component noise from second differences in the outer quarters of
/// the sweep, where the resonance curvature is small.
///
/// For white noise each component of a second difference has variance
/// `6σ²`, so `|Δ²|²/(6σ²)` is χ² with two degrees of freedom and median
/// `2 ln 2`; the median keeps a few off-model points from dominating.
fn noise_from_differences(values: &[Complex64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let diffs: Vec<f64> = values
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).norm_sqr())
        .collect();
    let quarter = (diffs.len() / 4).max(1);
    let mut tails: Vec<f64> = diffs[..quarter]
        .iter()
        .chain(&diffs[diffs.len() - quarter..])
        .copied()
        .collect();
    tails.sort_by(f64::total_cmp);
    let mid = tails.len() / 2;
    let median = if tails.len().is_multiple_of(2) {
        0.5 * (tails[mid - 1] + tails[mid])
    } else {
        tails[mid]
    };
    (median / (12.0 * std::f64::consts::LN_2)).sqrt()
}

/// Fits the notch model to a frequency sweep.
///
/// Initial values: circle fit for the diameter `Q_l/|Q_c|` and the rotation
/// `φ`, then a line through `tan(θ/2)` against frequency (θ being the
/// angle around the circle) for `f0` and `Q_l`. The refinement is damped
/// Gauss–Newton capped at 200 iterations.
pub fn fit_notch(sweep: &[(f64, Complex64)]) -> Result<NotchFitResult> {
    fit_notch_with(sweep, &LmOptions::default())
}

pub fn fit_notch_with(sweep: &[(f64, Complex64)], opts: &LmOptions) -> Result<NotchFitResult> {
    if sweep.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_POINTS,
            got: sweep.len(),
        });
    }
    if sweep.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument(
            "frequencies must be strictly increasing".into(),
        ));
    }
    if sweep
        .iter()
        .any(|(f, s)| !(*f > 0.0) || !s.re.is_finite() || !s.im.is_finite())
    {
        return Err(Error::InvalidArgument(
            "frequencies must be positive and S21 finite".into(),
        ));
    }
    let f_min = sweep[0].0;
    let f_max = sweep[sweep.len() - 1].0;
    let values: Vec<Complex64> = sweep.iter().map(|p| p.1).collect();
    let noise = noise_from_differences(&values);

    let depth = values.iter().map(|s| (s - 1.0).norm()).fold(0.0, f64::max);
    if depth < (10.0 * noise).max(1e-9) {
        return Err(Error::NoResonance(format!(
            "largest deviation from 1 is {depth:.3e}, noise {noise:.3e}"
        )));
    }

    let (centre, radius) = circle_fit(&values)
        .ok_or_else(|| Error::NoResonance("points do not lie on a circle".into()))?;
    let to_one = Complex64::new(1.0, 0.0) - centre;
    let phi = to_one.arg();
    let diameter = 2.0 * radius;
    if radius < 5.0 * noise {
        return Err(Error::NoResonance(format!(
            "resonance circle radius {radius:.3e} is within the noise"
        )));
    }

    // (S − c)/(−r e^{iφ}) = e^{−2i atan u}, u = 2 Q_l (f − f0)/f0
    let anchor = -Complex64::from_polar(radius, phi);
    let usable: Vec<(f64, f64)> = sweep
        .iter()
        .filter_map(|(f, s)| {
            let psi = ((s - centre) / anchor).arg();
            let u = (-0.5 * psi).tan();
            (u.abs() <= 10.0).then_some((*f, u))
        })
        .collect();
    if usable.len() < 3 {
        return Err(Error::NoResonance("too few points near resonance".into()));
    }
    let line = super::linear_fit(&usable, None)
        .map_err(|_| Error::NoResonance("phase does not vary across the sweep".into()))?;
    if !(line.slope > 0.0) {
        return Err(Error::NoResonance(
            "phase runs the wrong way around the circle".into(),
        ));
    }
    let f0_init = -line.intercept / line.slope;
    let ql_init = 0.5 * line.slope * f0_init;
    if !(f0_init > f_min && f0_init < f_max) || !(ql_init > 0.0) {
        return Err(Error::NoResonance(format!(
            "estimated f0 = {f0_init} GHz lies outside the sweep window [{f_min}, {f_max}]"
        )));
    }
    let qc_init = ql_init / diameter;

    let problem = NotchProblem { sweep };
    let init = DVector::from_vec(vec![f0_init, ql_init.ln(), qc_init.ln(), phi]);
    let report = minimize(&problem, init, opts);
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
        });
    }
    let p = &report.params;
    let model = NotchModel {
        f0: p[0],
        q_loaded: p[1].exp(),
        q_coupling: p[2].exp(),
        phi: p[3],
    };
    if !(model.f0 > f_min && model.f0 < f_max) {
        return Err(Error::NoResonance(format!(
            "fitted f0 = {} GHz lies outside the sweep window",
            model.f0
        )));
    }
    let linewidths = (f_max - f_min) / model.linewidth();
    if linewidths < MIN_LINEWIDTHS {
        return Err(Error::InvalidArgument(format!(
            "sweep spans {linewidths:.2} linewidths, need at least {MIN_LINEWIDTHS}"
        )));
    }

    let mut diagnostics = Vec::new();
    let inv_qi = model.inverse_q_internal();
    if !(inv_qi > 0.0) {
        diagnostics.push(format!("unphysical internal loss 1/Q_i = {inv_qi:.3e}"));
    }
    let rms = report.residual_norm / ((2 * sweep.len()) as f64).sqrt();
    if noise > 0.0 && rms > 10.0 * noise {
        diagnostics.push(format!(
            "residual rms {rms:.3e} exceeds 10x the noise estimate {noise:.3e}"
        ));
    }

    let se = report.stderr();
    let qi = model.q_internal();
    let qi_se = match report.covariance() {
        Some(cov) => {
            // ∂(1/Q_i)/∂[f0, ln Q_l, ln Q_c, φ]
            let g = DVector::from_vec(vec![
                0.0,
                -1.0 / model.q_loaded,
                model.phi.cos() / model.q_coupling,
                model.phi.sin() / model.q_coupling,
            ]);
            let var = (g.transpose() * cov * &g)[(0, 0)].max(0.0);
            qi * qi * var.sqrt()
        }
        None => f64::NAN,
    };
    Ok(NotchFitResult {
        f0: model.f0,
        q_loaded: model.q_loaded,
        q_internal: qi,
        q_coupling: model.q_coupling,
        phi: model.phi,
        stderr: NotchStderr {
            f0: se[0],
            q_loaded: se[1] * model.q_loaded,
            q_internal: qi_se,
            q_coupling: se[2] * model.q_coupling,
            phi: se[3],
        },
        converged: report.converged,
        iterations: report.iterations,
        residual_norm: report.residual_norm,
        noise_estimate: noise,
        diagnostics,
    })
}

/// Evenly spaced sweep of `n` points covering `linewidths` linewidths
/// centred on `f0`.
pub fn synthetic_sweep(m: &NotchModel, linewidths: f64, n: usize) -> Vec<(f64, Complex64)> {
    let half = 0.5 * linewidths * m.linewidth();
    (0..n)
        .map(|k| {
            let f = m.f0 - half + 2.0 * half * k as f64 / (n - 1) as f64;
            (f, notch_s21(f, m))
        })
        .collect()
}

/// Reads `f_GHz,re,im` CSV.
pub fn read_s21_csv<R: std::io::Read>(reader: R) -> Result<Vec<(f64, Complex64)>> {
    Ok(super::read_columns(reader, &["f_GHz", "re", "im"])?
        .into_iter()
        .map(|r| (r[0], Complex64::new(r[1], r[2])))
        .collect())
}
