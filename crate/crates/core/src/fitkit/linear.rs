//! Straight-line least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
    pub residual_norm: f64,
    pub n_points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares, or weighted with `weights[i]` multiplying the
/// squared residual of point `i` (use `1/σᵢ²`). Standard errors are scaled
/// by the reduced residual variance.
pub fn linear_fit(points: &[(f64, f64)], weights: Option<&[f64]>) -> Result<LinearFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Degenerate("non-finite data".into()));
    }
    let w: Vec<f64> = match weights {
        Some(w) if w.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w.len(),
            })
        }
        Some(w) => {
            if w.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                return Err(Error::InvalidArgument(
                    "weights must be finite and non-negative".into(),
                ));
            }
            w.to_vec()
        }
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return Err(Error::InvalidArgument("weights sum to zero".into()));
    }
    let xbar = points.iter().zip(&w).map(|((x, _), w)| w * x).sum::<f64>() / sw;
    let ybar = points.iter().zip(&w).map(|((_, y), w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = points
        .iter()
        .zip(&w)
        .map(|((x, _), w)| w * (x - xbar).powi(2))
        .sum();
    let sxy: f64 = points
        .iter()
        .zip(&w)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let x_scale = points.iter().map(|(x, _)| x.abs()).fold(0.0, f64::max);
    if !(sxx > 1e-24 * sw * x_scale.max(1e-300).powi(2)) {
        return Err(Error::Degenerate("all x values are identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = points
        .iter()
        .zip(&w)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let sst: f64 = points
        .iter()
        .zip(&w)
        .map(|((_, y), w)| w * (y - ybar).powi(2))
        .sum();
    let s2 = ssr / (n - 2) as f64;
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr: (s2 / sxx).sqrt(),
        intercept_stderr: (s2 * (1.0 / sw + xbar * xbar / sxx)).sqrt(),
        r_squared,
        residual_norm: ssr.sqrt(),
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)], None).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
        assert!(f.slope_stderr < 1e-15);
    }

    #[test]
    fn loss_per_bridge() {
        let pts: Vec<_> = (0..10)
            .map(|k| {
                let n = 10.0 * k as f64;
                (n, 5e-7 + n * 3.84e-9)
            })
            .collect();
        let f = linear_fit(&pts, None).unwrap();
        assert!((f.slope / 3.84e-9 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            linear_fit(&[(0.0, 1.0), (1.0, 2.0)], None),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            linear_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], None),
            Err(Error::Degenerate(_))
        ));
        assert!(linear_fit(&[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)], Some(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn weights_pull_toward_heavy_points() {
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 10.0)];
        let light = linear_fit(&pts, Some(&[1.0, 1.0, 1.0, 1e-6])).unwrap();
        let plain = linear_fit(&pts, None).unwrap();
        assert!((light.slope - 1.0).abs() < 1e-3);
        assert!(plain.slope > 2.0);
    }
}
