//! Power-dependent loss from two-level systems.
//!
//! `1/Q_i(n) = F·δ0 / √(1 + (n/n_c)^β) + 1/Q_hp`

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmOptions, Residuals};
use super::notch::NotchModel;
use crate::error::{Error, Result};
use crate::units::{dbm_to_watts, HBAR};

pub const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    pub f_delta0: f64,
    pub n_c: f64,
    pub beta: f64,
    pub q_hp: f64,
}

impl TlsParams {
    pub fn new(f_delta0: f64, n_c: f64, beta: f64, q_hp: f64) -> Result<Self> {
        for (name, v) in [
            ("f_delta0", f_delta0),
            ("n_c", n_c),
            ("beta", beta),
            ("q_hp", q_hp),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            f_delta0,
            n_c,
            beta,
            q_hp,
        })
    }
}

/// Loss tangent at mean photon number `n`.
pub fn tls_loss(n_photon: f64, t: &TlsParams) -> f64 {
    t.f_delta0 / (1.0 + (n_photon / t.n_c).powf(t.beta)).sqrt() + 1.0 / t.q_hp
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsFitResult {
    pub f_delta0: f64,
    pub n_c: f64,
    pub beta: f64,
    pub q_hp: f64,
    pub stderr: TlsParams,
    pub converged: bool,
    pub iterations: usize,
    /// Norm of the relative residuals.
    pub residual_norm: f64,
}

impl TlsFitResult {
    pub fn params(&self) -> TlsParams {
        TlsParams {
            f_delta0: self.f_delta0,
            n_c: self.n_c,
            beta: self.beta,
            q_hp: self.q_hp,
        }
    }
}

struct TlsProblem<'a> {
    points: &'a [(f64, f64)],
}

fn unpack(p: &DVector<f64>) -> TlsParams {
    TlsParams {
        f_delta0: p[0].exp(),
        n_c: p[1].exp(),
        beta: p[2].exp(),
        q_hp: p[3].exp(),
    }
}

// params are logs; residuals relative to the data
impl Residuals for TlsProblem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let t = unpack(p);
        DVector::from_iterator(
            self.points.len(),
            self.points.iter().map(|(n, y)| tls_loss(*n, &t) / y - 1.0),
        )
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let t = unpack(p);
        let mut j = DMatrix::zeros(self.points.len(), 4);
        for (k, (n, y)) in self.points.iter().enumerate() {
            let r = n / t.n_c;
            let rb = if r > 0.0 { r.powf(t.beta) } else { 0.0 };
            let s = 1.0 + rb;
            let tls = t.f_delta0 / s.sqrt();
            // d(tls)/d(ln rb) = −tls·rb/(2s)
            let d_lnrb = -0.5 * tls * rb / s;
            j[(k, 0)] = tls / y;
            j[(k, 1)] = -t.beta * d_lnrb / y;
            j[(k, 2)] = if r > 0.0 {
                t.beta * r.ln() * d_lnrb / y
            } else {
                0.0
            };
            j[(k, 3)] = -1.0 / (t.q_hp * y);
        }
        j
    }
}

/// Fits the saturation curve to `(n_photon, 1/Q_i)` points.
///
/// Initial values: the high-power plateau from the smallest loss, the
/// low-power excess from the largest, `n_c` at the geometric midpoint of
/// the half-excess crossing, `β = 1`.
pub fn fit_tls(points: &[(f64, f64)]) -> Result<TlsFitResult> {
    fit_tls_with(points, &LmOptions::default())
}

pub fn fit_tls_with(points: &[(f64, f64)], opts: &LmOptions) -> Result<TlsFitResult> {
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_POINTS,
            got: points.len(),
        });
    }
    if points
        .iter()
        .any(|(n, y)| !(*n >= 0.0) || !(*y > 0.0) || !n.is_finite() || !y.is_finite())
    {
        return Err(Error::InvalidArgument(
            "photon numbers must be non-negative and losses positive".into(),
        ));
    }
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(0.0, f64::max);
    if hi <= lo * (1.0 + 1e-9) {
        return Err(Error::Degenerate(
            "loss does not vary with photon number".into(),
        ));
    }
    let half = lo + 0.5 * (hi - lo);
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_c0 = sorted
        .windows(2)
        .find(|w| w[0].1 >= half && w[1].1 < half)
        .map(|w| (w[0].0.max(1e-3) * w[1].0.max(1e-3)).sqrt())
        .unwrap_or_else(|| sorted[sorted.len() / 2].0.max(1.0));
    let q_hp0 = 1.0 / (0.9 * lo);
    let fd0 = (hi - 0.9 * lo).max(1e-3 * hi);

    let problem = TlsProblem { points };
    let init = DVector::from_vec(vec![fd0.ln(), n_c0.ln(), 0.0, q_hp0.ln()]);
    let report = minimize(&problem, init, opts);
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
        });
    }
    let t = unpack(&report.params);
    let se = report.stderr();
    Ok(TlsFitResult {
        f_delta0: t.f_delta0,
        n_c: t.n_c,
        beta: t.beta,
        q_hp: t.q_hp,
        stderr: TlsParams {
            f_delta0: se[0] * t.f_delta0,
            n_c: se[1] * t.n_c,
            beta: se[2] * t.beta,
            q_hp: se[3] * t.q_hp,
        },
        converged: report.converged,
        iterations: report.iterations,
        residual_norm: report.residual_norm,
    })
}

/// Mean photon number for a drive of `power_dbm` at the feedline:
/// `2 P Q_l² / (Q_c ħ ω0²)`.
pub fn photon_number(power_dbm: f64, m: &NotchModel) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * m.f0 * 1e9;
    2.0 * dbm_to_watts(power_dbm) * m.q_loaded * m.q_loaded / (m.q_coupling * HBAR * omega * omega)
}

/// Reads `n_photon,inv_qi` CSV.
pub fn read_tls_csv<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    Ok(super::read_columns(reader, &["n_photon", "inv_qi"])?
        .into_iter()
        .map(|r| (r[0], r[1]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plateau_params() -> TlsParams {
        TlsParams::new(1.0 / 2.08e6, 300.0, 1.0, 5.3e7).unwrap()
    }

    #[test]
    fn limits() {
        let t = plateau_params();
        assert_eq!(tls_loss(0.0, &t), t.f_delta0 + 1.0 / t.q_hp);
        assert!((tls_loss(1e30, &t) - 1.0 / t.q_hp).abs() < 1e-18);
    }

    #[test]
    fn at_critical_number() {
        let t = TlsParams::new(4.81e-7, 1.0, 1.0, 5.3e7).unwrap();
        assert!((tls_loss(1.0, &t) - 3.589_862_862_790_313e-7).abs() < 1e-20);
    }

    #[test]
    fn photon_number_reference() {
        let m = NotchModel {
            f0: 6.3,
            q_loaded: 9.52e4,
            q_coupling: 1e5,
            phi: 0.0,
        };
        let n = photon_number(-130.0, &m);
        assert!((n / 109.695_015_977_125_1 - 1.0).abs() < 1e-12);
        assert!((photon_number(-140.0, &m) / n - 0.1).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_differences() {
        let pts: Vec<(f64, f64)> = [0.0, 0.5, 3.0, 40.0, 800.0, 1e5]
            .iter()
            .map(|n| (*n, tls_loss(*n, &plateau_params()) * 1.01))
            .collect();
        let problem = TlsProblem { points: &pts };
        let p = DVector::from_vec(vec![(4e-7f64).ln(), (200.0f64).ln(), 0.1, (4e7f64).ln()]);
        let j = problem.jacobian(&p);
        for c in 0..4 {
            let h = 1e-6;
            let mut a = p.clone();
            let mut b = p.clone();
            a[c] += h;
            b[c] -= h;
            let fd = (problem.residuals(&a) - problem.residuals(&b)) / (2.0 * h);
            assert!((fd - j.column(c)).amax() < 1e-7, "column {c}");
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let t = plateau_params();
        let pts: Vec<(f64, f64)> = (0..25)
            .map(|k| {
                let n = 10f64.powf(-2.0 + 0.3 * k as f64);
                (n, tls_loss(n, &t))
            })
            .collect();
        let fit = fit_tls(&pts).unwrap();
        assert!((fit.f_delta0 / t.f_delta0 - 1.0).abs() < 1e-6);
        assert!((fit.n_c / t.n_c - 1.0).abs() < 1e-5);
        assert!((fit.beta - 1.0).abs() < 1e-5);
        assert!((fit.q_hp / t.q_hp - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_rejected() {
        let pts: Vec<_> = (0..10).map(|k| (k as f64, 1e-6)).collect();
        assert!(fit_tls(&pts).is_err());
    }
}
