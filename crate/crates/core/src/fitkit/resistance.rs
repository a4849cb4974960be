//! Resistance of bridge units and the resistivity fit across geometries.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BRIDGE_THICKNESS_NM: f64 = 400.0;
pub const DEFAULT_PAD_THICKNESS_NM: f64 = 200.0;

/// Conductor dimensions: length and width in µm, thickness in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub length_um: f64,
    pub width_um: f64,
    pub thickness_nm: f64,
}

impl Dims {
    pub fn new(length_um: f64, width_um: f64, thickness_nm: f64) -> Self {
        Self {
            length_um,
            width_um,
            thickness_nm,
        }
    }

    /// Bridge span at the default deposited bridge thickness.
    pub fn bridge(length_um: f64, width_um: f64) -> Self {
        Self::new(length_um, width_um, DEFAULT_BRIDGE_THICKNESS_NM)
    }

    /// Landing pad at the default base-film thickness.
    pub fn pad(length_um: f64, width_um: f64) -> Self {
        Self::new(length_um, width_um, DEFAULT_PAD_THICKNESS_NM)
    }

    /// `length / (width · thickness)` in 1/m.
    fn ratio(&self, what: &str) -> Result<f64> {
        for (name, v) in [
            ("length", self.length_um),
            ("width", self.width_um),
            ("thickness", self.thickness_nm),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{what} {name} must be positive, got {v}"
                )));
            }
        }
        Ok((self.length_um * 1e-6) / (self.width_um * 1e-6 * self.thickness_nm * 1e-9))
    }
}

/// One unit of a resistance chain: the bridge plus (optionally) its pad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitGeometry {
    pub bridge: Dims,
    pub pad: Option<Dims>,
}

/// `L_ab/(W_ab t_ab) + L_pad/(W_pad t_pad)` in 1/m; the pad term is dropped
/// when there is no pad.
pub fn geometric_ratio(g: &UnitGeometry) -> Result<f64> {
    let pad = match &g.pad {
        Some(p) => p.ratio("pad")?,
        None => 0.0,
    };
    Ok(g.bridge.ratio("bridge")? + pad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistivityFit {
    /// Ω·m
    pub rho: f64,
    pub rho_stderr: f64,
    pub residual_norm: f64,
    pub n_units: usize,
}

/// Zero-intercept least squares of unit resistance against geometric ratio;
/// the slope is the resistivity.
pub fn fit_resistivity(units: &[(UnitGeometry, f64)]) -> Result<ResistivityFit> {
    if units.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: units.len(),
        });
    }
    let data = units
        .iter()
        .map(|(g, r)| Ok((geometric_ratio(g)?, *r)))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
            (lo.min(*x), hi.max(*x))
        });
    if hi - lo <= 1e-12 * hi.abs() {
        return Err(Error::Degenerate(
            "all units share one geometric ratio".into(),
        ));
    }
    let sxx: f64 = data.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = data.iter().map(|(x, y)| x * y).sum();
    let rho = sxy / sxx;
    let ssr: f64 = data.iter().map(|(x, y)| (y - rho * x).powi(2)).sum();
    let dof = (data.len() - 1) as f64;
    Ok(ResistivityFit {
        rho,
        rho_stderr: (ssr / dof / sxx).sqrt(),
        residual_norm: ssr.sqrt(),
        n_units: data.len(),
    })
}

pub const UNITS_CSV_HEADER: [&str; 7] = [
    "bridge_length_um",
    "bridge_width_um",
    "bridge_thickness_nm",
    "pad_length_um",
    "pad_width_um",
    "pad_thickness_nm",
    "resistance_ohm",
];

/// Reads per-unit geometries and resistances. Empty pad columns mean no pad;
/// an empty thickness takes the default.
pub fn read_units_csv<R: Read>(reader: R) -> Result<Vec<(UnitGeometry, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr.headers()?.clone();
    if found.iter().ne(UNITS_CSV_HEADER.iter().copied()) {
        return Err(Error::Field {
            field: "header".into(),
            message: format!("expected `{}`", UNITS_CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |k: usize| -> Result<Option<f64>> {
            let v = &record[k];
            if v.is_empty() {
                return Ok(None);
            }
            v.parse().map(Some).map_err(|_| Error::Field {
                field: format!("row {}, column `{}`", i + 2, UNITS_CSV_HEADER[k]),
                message: format!("`{v}` is not a number"),
            })
        };
        let required = |k: usize| -> Result<f64> {
            cell(k)?.ok_or_else(|| Error::Field {
                field: format!("row {}, column `{}`", i + 2, UNITS_CSV_HEADER[k]),
                message: "value required".into(),
            })
        };
        let bridge = Dims::new(
            required(0)?,
            required(1)?,
            cell(2)?.unwrap_or(DEFAULT_BRIDGE_THICKNESS_NM),
        );
        let pad = match (cell(3)?, cell(4)?) {
            (Some(l), Some(w)) => Some(Dims::new(
                l,
                w,
                cell(5)?.unwrap_or(DEFAULT_PAD_THICKNESS_NM),
            )),
            (None, None) => None,
            _ => {
                return Err(Error::Field {
                    field: format!("row {}", i + 2),
                    message: "pad length and width must both be given or both empty".into(),
                })
            }
        };
        out.push((UnitGeometry { bridge, pad }, required(6)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_only_ratio() {
        let g = UnitGeometry {
            bridge: Dims::bridge(60.0, 16.0),
            pad: None,
        };
        assert!((geometric_ratio(&g).unwrap() / 9.375e6 - 1.0).abs() < 1e-12);
        let wide = UnitGeometry {
            bridge: Dims::bridge(60.0, 32.0),
            pad: None,
        };
        assert!((geometric_ratio(&wide).unwrap() * 2.0 / 9.375e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_pad_doubles() {
        let d = Dims::new(60.0, 16.0, 400.0);
        let single = geometric_ratio(&UnitGeometry {
            bridge: d,
            pad: None,
        })
        .unwrap();
        let both = geometric_ratio(&UnitGeometry {
            bridge: d,
            pad: Some(d),
        })
        .unwrap();
        assert_eq!(both, 2.0 * single);
    }

    #[test]
    fn zero_dimension_rejected() {
        let g = UnitGeometry {
            bridge: Dims::new(60.0, 0.0, 400.0),
            pad: None,
        };
        assert!(geometric_ratio(&g).is_err());
    }

    #[test]
    fn exact_resistivity() {
        let rho = 0.21e-6;
        let units: Vec<_> = [(30.0, 16.0), (60.0, 16.0), (60.0, 30.0), (100.0, 30.0)]
            .iter()
            .map(|&(l, w)| {
                let g = UnitGeometry {
                    bridge: Dims::bridge(l, w),
                    pad: Some(Dims::pad(20.0, w + 10.0)),
                };
                (g, rho * geometric_ratio(&g).unwrap())
            })
            .collect();
        let fit = fit_resistivity(&units).unwrap();
        assert!((fit.rho / rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_geometry_is_rank_deficient() {
        let g = UnitGeometry {
            bridge: Dims::bridge(60.0, 16.0),
            pad: None,
        };
        assert!(matches!(
            fit_resistivity(&[(g, 1.0), (g, 1.1), (g, 0.9)]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn units_csv() {
        let text = "bridge_length_um,bridge_width_um,bridge_thickness_nm,pad_length_um,pad_width_um,pad_thickness_nm,resistance_ohm\n\
                    60,16,,,,,1.97\n\
                    60,30,400,20,40,,1.2\n";
        let units = read_units_csv(text.as_bytes()).unwrap();
        assert_eq!(units.len(), 2);
        assert!(units[0].0.pad.is_none());
        assert_eq!(
            units[1].0.pad.unwrap().thickness_nm,
            DEFAULT_PAD_THICKNESS_NM
        );
        let bad = "bridge_length_um,bridge_width_um,bridge_thickness_nm,pad_length_um,pad_width_um,pad_thickness_nm,resistance_ohm\n60,16,,20,,,1\n";
        assert!(read_units_csv(bad.as_bytes()).is_err());
    }
}
