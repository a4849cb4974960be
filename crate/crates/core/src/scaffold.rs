//! Photoresist scaffold profiles.
//!
//! A reflowed scaffold of length `L` is modelled as the sum of one edge
//! profile and its mirror image, `s(x) = e(x) + e(L − x)`. Long scaffolds
//! develop a flat region in the middle; [`detect_plateau`] finds it and
//! [`max_stable_length`] searches for the longest length without one.
//! Grayscale scaffolds are parabolic by construction ([`grayscale_profile`]).
//!
//! Positions and heights are in micrometers.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig;

/// Pitch used when a scaffold is simulated or an irregular profile resampled.
pub const GRID_PITCH: f64 = 0.1;
pub const DEFAULT_SLOPE_TOL: f64 = 0.01;
pub const DEFAULT_MIN_SPAN: f64 = 10.0;
/// Step of the length scan in [`max_stable_length`].
pub const LENGTH_RESOLUTION: f64 = 0.5;

/// Uniformly sampled height curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub x0: f64,
    pub dx: f64,
    pub heights: Vec<f64>,
}

impl Profile {
    pub fn new(x0: f64, dx: f64, heights: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "pitch {dx} must be positive"
            )));
        }
        if heights.len() < 2 {
            return Err(Error::InvalidProfile(format!(
                "need at least 2 samples, got {}",
                heights.len()
            )));
        }
        if let Some(h) = heights.iter().find(|h| !(**h >= 0.0) || !h.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "height {h} is negative or not finite"
            )));
        }
        Ok(Self { x0, dx, heights })
    }

    /// Samples `f` on `n` points starting at `x0` with pitch `dx`.
    pub fn from_fn(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(x0, dx, (0..n).map(|i| f(x0 + i as f64 * dx)).collect())
    }

    /// Resamples scattered `(x, h)` points with increasing `x` onto a uniform
    /// grid. Data that is already uniform (to 1e-9 relative) is kept as is.
    pub fn from_points(points: &[(f64, f64)], pitch: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidProfile(format!(
                "need at least 2 samples, got {}",
                points.len()
            )));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidProfile(
                "x must be strictly increasing".into(),
            ));
        }
        let x0 = points[0].0;
        let dx = points[1].0 - x0;
        let uniform = points
            .iter()
            .enumerate()
            .all(|(i, (x, _))| ((x - x0) - i as f64 * dx).abs() <= 1e-9 * (x.abs() + dx));
        if uniform {
            return Self::new(x0, dx, points.iter().map(|p| p.1).collect());
        }
        let span = points[points.len() - 1].0 - x0;
        let n = (span / pitch).floor() as usize + 1;
        let mut j = 0;
        let heights = (0..n.max(2))
            .map(|i| {
                let x = (x0 + i as f64 * pitch).min(x0 + span);
                while j + 2 < points.len() && points[j + 1].0 < x {
                    j += 1;
                }
                let (xa, ha) = points[j];
                let (xb, hb) = points[j + 1];
                let t = ((x - xa) / (xb - xa)).clamp(0.0, 1.0);
                ha + t * (hb - ha)
            })
            .collect();
        Self::new(x0, pitch, heights)
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// Extent from first to last sample.
    pub fn span(&self) -> f64 {
        (self.len() - 1) as f64 * self.dx
    }

    /// Linear interpolation, held flat beyond either end.
    pub fn at(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.dx;
        if t <= 0.0 {
            return self.heights[0];
        }
        let last = self.len() - 1;
        if t >= last as f64 {
            return self.heights[last];
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        self.heights[i] + f * (self.heights[i + 1] - self.heights[i])
    }

    /// Central differences inside, one-sided at the ends.
    pub fn slopes(&self) -> Vec<f64> {
        let h = &self.heights;
        let n = h.len();
        (0..n)
            .map(|i| match i {
                0 => (h[1] - h[0]) / self.dx,
                i if i == n - 1 => (h[n - 1] - h[n - 2]) / self.dx,
                i => (h[i + 1] - h[i - 1]) / (2.0 * self.dx),
            })
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.heights
            .iter()
            .enumerate()
            .map(|(i, h)| (self.x(i), *h))
    }

    /// Reads `x_um,h_um` CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x_um" || &headers[1] != "h_um" {
            return Err(Error::Field {
                field: "header".into(),
                message: format!(
                    "expected `x_um,h_um`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut points = Vec::new();
        for (i, row) in rdr.deserialize::<(f64, f64)>().enumerate() {
            points.push(row.map_err(|e| Error::Field {
                field: format!("row {}", i + 2),
                message: e.to_string(),
            })?);
        }
        Self::from_points(&points, GRID_PITCH)
    }

    /// Writes `x_um,h_um` CSV with 6 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x_um,h_um")?;
        for (x, h) in self.points() {
            writeln!(w, "{},{}", sig(x, 6), sig(h, 6))?;
        }
        Ok(())
    }
}

/// Sum of an edge profile and its mirror image over `[0, length]`.
///
/// Sampled at [`GRID_PITCH`] (rounded so both ends fall on the grid, and at
/// least two samples). Sample `i` and `n − 1 − i` see the same pair of edge
/// positions, so the result is exactly symmetric.
pub fn simulate_scaffold(edge: &Profile, length: f64) -> Result<Profile> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "length {length} must be positive"
        )));
    }
    if edge.len() < 2 {
        return Err(Error::InvalidProfile(
            "edge needs at least 2 samples".into(),
        ));
    }
    let intervals = ((length / GRID_PITCH).round() as usize).max(1);
    let dx = length / intervals as f64;
    let n = intervals + 1;
    let heights = (0..n)
        .map(|i| edge.at(i as f64 * dx) + edge.at((n - 1 - i) as f64 * dx))
        .collect();
    Profile::new(0.0, dx, heights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub has_plateau: bool,
    /// Widest run of samples with |slope| below tolerance (0 if none).
    pub plateau_span: f64,
    pub plateau_start: f64,
    pub apex_height: f64,
    pub apex_position: f64,
}

/// Finds the widest interval on which every sample slope satisfies
/// `|slope| < slope_tol`. A plateau is reported if it spans at least
/// `min_span`.
pub fn detect_plateau(p: &Profile, slope_tol: f64, min_span: f64) -> Result<PlateauReport> {
    if !(slope_tol > 0.0) || !(min_span > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "slope_tol ({slope_tol}) and min_span ({min_span}) must be positive"
        )));
    }
    let (apex_i, apex_height) =
        p.heights
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, h)| {
                if *h > acc.1 {
                    (i, *h)
                } else {
                    acc
                }
            });

    let mut best: Option<(usize, usize)> = None;
    let mut run_start = None;
    let slopes = p.slopes();
    for (i, s) in slopes.iter().enumerate() {
        if s.abs() < slope_tol {
            let start = *run_start.get_or_insert(i);
            if best.is_none_or(|(a, b)| i - start > b - a) {
                best = Some((start, i));
            }
        } else {
            run_start = None;
        }
    }
    let (plateau_span, plateau_start) = best
        .map(|(a, b)| ((b - a) as f64 * p.dx, p.x(a)))
        .unwrap_or((0.0, p.x0));
    Ok(PlateauReport {
        has_plateau: plateau_span >= min_span,
        plateau_span,
        plateau_start,
        apex_height,
        apex_position: p.x(apex_i),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldHeight {
    pub length: f64,
    /// Maximum of the simulated profile.
    pub apex_height: f64,
    /// `s(L/2) = 2 e(L/2)`.
    pub center_height: f64,
}

pub fn height_vs_length(edge: &Profile, lengths: &[f64]) -> Result<Vec<ScaffoldHeight>> {
    lengths
        .iter()
        .map(|&length| {
            let s = simulate_scaffold(edge, length)?;
            let apex_height = s.heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(ScaffoldHeight {
                length,
                apex_height,
                center_height: 2.0 * edge.at(0.5 * length),
            })
        })
        .collect()
}

/// One row of a length sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub length: f64,
    pub apex_height: f64,
    pub has_plateau: bool,
    pub plateau_span: f64,
}

pub fn sweep(
    edge: &Profile,
    lengths: &[f64],
    slope_tol: f64,
    min_span: f64,
) -> Result<Vec<SweepRow>> {
    lengths
        .iter()
        .map(|&length| {
            let r = detect_plateau(&simulate_scaffold(edge, length)?, slope_tol, min_span)?;
            Ok(SweepRow {
                length,
                apex_height: r.apex_height,
                has_plateau: r.has_plateau,
                plateau_span: r.plateau_span,
            })
        })
        .collect()
}

/// Writes `length_um,apex_um,has_plateau,plateau_span_um` CSV.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "length_um,apex_um,has_plateau,plateau_span_um")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            sig(r.length, 6),
            sig(r.apex_height, 6),
            r.has_plateau,
            sig(r.plateau_span, 6)
        )?;
    }
    Ok(())
}

/// Parabolic grayscale scaffold `h(x) = height·(1 − ((2x − L)/L)²)` on
/// `n` samples over `[0, length]`.
pub fn grayscale_profile(height: f64, length: f64, n: usize) -> Result<Profile> {
    if !(height > 0.0) || !(length > 0.0) || !height.is_finite() || !length.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "height ({height}) and length ({length}) must be positive"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 samples, got {n}"
        )));
    }
    let dx = length / (n - 1) as f64;
    let heights = (0..n)
        .map(|i| {
            let u = (2 * i) as f64 / (n - 1) as f64 - 1.0;
            (height * (1.0 - u * u)).max(0.0)
        })
        .collect();
    Profile::new(0.0, dx, heights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxLength {
    pub length: f64,
    /// Plateau onset is monotone in length over the searched range.
    pub monotone: bool,
    /// Every length in the range has a plateau; `length` is then the lower bound.
    pub always_plateau: bool,
}

/// Longest plateau-free scaffold length in `range`, on a
/// [`LENGTH_RESOLUTION`] grid.
///
/// The whole grid is evaluated: for a monotone onset this gives the same
/// answer as bisection, and it also exposes ranges where plateaus come and
/// go (`monotone = false`, result = largest plateau-free length seen).
pub fn max_stable_length(
    edge: &Profile,
    slope_tol: f64,
    min_span: f64,
    range: (f64, f64),
) -> Result<MaxLength> {
    let (lo, hi) = range;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "search range ({lo}, {hi}) must satisfy 0 < lo < hi"
        )));
    }
    let steps = ((hi - lo) / LENGTH_RESOLUTION).floor() as usize;
    let mut lengths: Vec<f64> = (0..=steps)
        .map(|k| lo + k as f64 * LENGTH_RESOLUTION)
        .collect();
    if hi - lengths[steps] > 1e-9 {
        lengths.push(hi);
    }
    let flags = sweep(edge, &lengths, slope_tol, min_span)?
        .into_iter()
        .map(|r| r.has_plateau)
        .collect::<Vec<_>>();
    let first_plateau = flags.iter().position(|f| *f);
    let monotone = match first_plateau {
        Some(i) => flags[i..].iter().all(|f| *f),
        None => true,
    };
    match flags.iter().rposition(|f| !*f) {
        None => Ok(MaxLength {
            length: lo,
            monotone,
            always_plateau: true,
        }),
        Some(i) => Ok(MaxLength {
            length: lengths[i],
            monotone,
            always_plateau: false,
        }),
    }
}
