use std::fs;
use std::path::Path;

use airbridge_core::fitkit::notch::read_s21_csv;
use airbridge_core::fitkit::resistance::read_units_csv;
use airbridge_core::fitkit::tls::read_tls_csv;
use airbridge_core::fitkit::{
    self, fit_notch, fit_resistivity, fit_tls, linear_fit, photon_number, NotchFitResult,
};
use airbridge_core::layout::{self, BridgePlacement, RuleConfig, Violation};
use airbridge_core::quantize::{derive_design_with, Design, TransmonOptions};
use airbridge_core::scaffold::{self, Profile};
use airbridge_core::Error;
use serde::Serialize;
use serde_json::json;

use crate::{Command, FitCommand, ScaffoldCommand};

pub struct Output {
    pub stdout: String,
    pub diagnostics: Vec<String>,
}

impl Output {
    fn plain(stdout: String) -> Self {
        Self {
            stdout,
            diagnostics: Vec::new(),
        }
    }

    fn json<T: Serialize>(value: &T) -> Result<Self, CliError> {
        let mut s =
            serde_json::to_string_pretty(value).map_err(|e| CliError::data(None, e.to_string()))?;
        s.push('\n');
        Ok(Self::plain(s))
    }
}

#[derive(Debug)]
pub struct CliError {
    usage: bool,
    file: Option<String>,
    message: String,
}

impl CliError {
    fn data(file: Option<&Path>, message: String) -> Self {
        Self {
            usage: false,
            file: file.map(|p| p.display().to_string()),
            message,
        }
    }

    pub fn usage(message: String) -> Self {
        Self {
            usage: true,
            file: None,
            message,
        }
    }

    fn from_core(file: Option<&Path>, e: Error) -> Self {
        Self::data(file, e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        if self.usage {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "level": "error",
            "kind": if self.usage { "usage" } else { "data" },
            "file": self.file,
            "message": self.message,
        })
        .to_string()
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::data(Some(path), format!("cannot read: {e}")))
}

/// Runs `f` on the file contents, attributing any error to the file.
fn with_file<T>(
    path: &Path,
    f: impl FnOnce(&str) -> airbridge_core::Result<T>,
) -> Result<T, CliError> {
    let text = read(path)?;
    f(&text).map_err(|e| CliError::from_core(Some(path), e))
}

fn core<T>(r: airbridge_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core(None, e))
}

/// `start:stop:step` length grid, stop inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Lengths(pub Vec<f64>);

pub fn parse_lengths(s: &str) -> Result<Lengths, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match nums.as_slice() {
        [single] if *single > 0.0 => Ok(Lengths(vec![*single])),
        [start, stop, step] => {
            if !(*start > 0.0) || !(*stop >= *start) || !(*step > 0.0) {
                return Err("expected 0 < start <= stop and step > 0".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n > 1_000_000 {
                return Err("too many lengths".into());
            }
            Ok(Lengths((0..=n).map(|k| start + k as f64 * step).collect()))
        }
        _ => Err("expected start:stop:step or a single positive length".into()),
    }
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("`{a}` is not a number"))?;
    let hi: f64 = b
        .trim()
        .parse()
        .map_err(|_| format!("`{b}` is not a number"))?;
    if !(lo > 0.0) || !(hi > lo) {
        return Err("expected 0 < lo < hi".into());
    }
    Ok((lo, hi))
}

pub fn run(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Quantize { design, min_ratio } => {
            if !(*min_ratio > 0.0) {
                return Err(CliError::usage(format!(
                    "--min-ratio must be positive, got {min_ratio}"
                )));
            }
            let d = with_file(design, Design::from_json)?;
            let opts = TransmonOptions {
                min_ratio: *min_ratio,
            };
            let report =
                derive_design_with(&d, &opts).map_err(|e| CliError::from_core(Some(design), e))?;
            Output::json(&report.rounded())
        }
        Command::Scaffold(sc) => scaffold(sc),
        Command::Fit(fc) => fit(fc),
        Command::Place {
            layout: lpath,
            rule,
        } => {
            let paths = with_file(lpath, layout::parse_layout)?;
            let rules = match rule {
                Some(r) => with_file(r, RuleConfig::from_json)?,
                None => RuleConfig::default(),
            };
            let placements = layout::place_layout(&paths, &rules)
                .map_err(|e| CliError::from_core(Some(lpath), e))?;
            Output::json(&placements)
        }
        Command::Check {
            layout: lpath,
            placements,
            clearance,
        } => {
            let paths = with_file(lpath, layout::parse_layout)?;
            let text = read(placements)?;
            let list: Vec<BridgePlacement> = serde_json::from_str(&text).map_err(|e| {
                CliError::data(
                    Some(placements),
                    format!("line {}, column {}: {e}", e.line(), e.column()),
                )
            })?;
            let violations = layout::check_placements(&paths, &list, *clearance)
                .map_err(|e| CliError::from_core(Some(placements), e))?;
            #[derive(Serialize)]
            struct Report<'a> {
                n_placements: usize,
                min_clearance_um: f64,
                violations: &'a [Violation],
            }
            Output::json(&Report {
                n_placements: list.len(),
                min_clearance_um: *clearance,
                violations: &violations,
            })
        }
    }
}

fn read_profile(path: &Path) -> Result<Profile, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::data(Some(path), format!("cannot read: {e}")))?;
    Profile::read_csv(file).map_err(|e| CliError::from_core(Some(path), e))
}

fn profile_csv(p: &Profile) -> Result<Output, CliError> {
    let mut buf = Vec::new();
    core(p.write_csv(&mut buf))?;
    Ok(Output::plain(String::from_utf8(buf).expect("ascii csv")))
}

fn scaffold(cmd: &ScaffoldCommand) -> Result<Output, CliError> {
    match cmd {
        ScaffoldCommand::Sim { edge, length } => {
            let e = read_profile(edge)?;
            profile_csv(&core(scaffold::simulate_scaffold(&e, *length))?)
        }
        ScaffoldCommand::Sweep {
            edge,
            lengths,
            plateau,
        } => {
            let e = read_profile(edge)?;
            let rows = core(scaffold::sweep(
                &e,
                &lengths.0,
                plateau.slope_tol,
                plateau.min_span,
            ))?;
            let mut buf = Vec::new();
            core(scaffold::write_sweep_csv(&rows, &mut buf))?;
            Ok(Output::plain(String::from_utf8(buf).expect("ascii csv")))
        }
        ScaffoldCommand::Grayscale {
            height,
            length,
            samples,
        } => {
            let n = samples
                .unwrap_or_else(|| (length / scaffold::GRID_PITCH).round().max(2.0) as usize + 1);
            profile_csv(&core(scaffold::grayscale_profile(*height, *length, n))?)
        }
        ScaffoldCommand::Maxlen {
            edge,
            range,
            plateau,
        } => {
            let e = read_profile(edge)?;
            let m = core(scaffold::max_stable_length(
                &e,
                plateau.slope_tol,
                plateau.min_span,
                *range,
            ))?;
            Output::json(&json!({
                "max_length_um": m.length,
                "monotone": m.monotone,
                "always_plateau": m.always_plateau,
                "slope_tol": plateau.slope_tol,
                "min_span_um": plateau.min_span,
                "range_um": [range.0, range.1],
            }))
        }
    }
}

fn read_pairs(path: &Path, header: [&str; 2]) -> Result<Vec<(f64, f64)>, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::data(Some(path), format!("cannot read: {e}")))?;
    let rows =
        fitkit::read_columns(file, &header).map_err(|e| CliError::from_core(Some(path), e))?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

fn fit(cmd: &FitCommand) -> Result<Output, CliError> {
    match cmd {
        FitCommand::Resistance { data } => {
            let pts = read_pairs(data, ["n_bridges", "resistance_ohm"])?;
            Output::json(&linear_fit(&pts, None).map_err(|e| CliError::from_core(Some(data), e))?)
        }
        FitCommand::Resistivity { data } => {
            let file = fs::File::open(data)
                .map_err(|e| CliError::data(Some(data), format!("cannot read: {e}")))?;
            let units = read_units_csv(file).map_err(|e| CliError::from_core(Some(data), e))?;
            Output::json(&fit_resistivity(&units).map_err(|e| CliError::from_core(Some(data), e))?)
        }
        FitCommand::Loss { data, weighted } => {
            let pts = read_pairs(data, ["n_bridges", "inv_qi"])?;
            let weights: Option<Vec<f64>> =
                weighted.then(|| pts.iter().map(|(_, y)| 1.0 / (y * y)).collect());
            let fit = linear_fit(&pts, weights.as_deref())
                .map_err(|e| CliError::from_core(Some(data), e))?;
            Output::json(&fit)
        }
        FitCommand::S21 { data, power_dbm } => {
            let file = fs::File::open(data)
                .map_err(|e| CliError::data(Some(data), format!("cannot read: {e}")))?;
            let sweep = read_s21_csv(file).map_err(|e| CliError::from_core(Some(data), e))?;
            let fit = fit_notch(&sweep).map_err(|e| CliError::from_core(Some(data), e))?;
            #[derive(Serialize)]
            struct S21<'a> {
                #[serde(flatten)]
                fit: &'a NotchFitResult,
                #[serde(skip_serializing_if = "Option::is_none")]
                power_dbm: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                photon_number: Option<f64>,
            }
            let mut out = Output::json(&S21 {
                fit: &fit,
                power_dbm: *power_dbm,
                photon_number: power_dbm.map(|p| photon_number(p, &fit.model())),
            })?;
            out.diagnostics = fit
                .diagnostics
                .iter()
                .map(|d| {
                    json!({"level": "warning", "file": data.display().to_string(), "message": d})
                        .to_string()
                })
                .collect();
            Ok(out)
        }
        FitCommand::Tls { data } => {
            let file = fs::File::open(data)
                .map_err(|e| CliError::data(Some(data), format!("cannot read: {e}")))?;
            let pts = read_tls_csv(file).map_err(|e| CliError::from_core(Some(data), e))?;
            Output::json(&fit_tls(&pts).map_err(|e| CliError::from_core(Some(data), e))?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_grid() {
        assert_eq!(parse_lengths("20:200:10").unwrap().0.len(), 19);
        assert_eq!(parse_lengths("20:25:10").unwrap().0, vec![20.0]);
        assert_eq!(parse_lengths("0.1:0.3:0.1").unwrap().0.len(), 3);
        assert!(parse_lengths("20:10:1").is_err());
        assert!(parse_lengths("a:b:c").is_err());
        assert!(parse_lengths("20:30").is_err());
    }

    #[test]
    fn range() {
        assert_eq!(parse_range("20:200").unwrap(), (20.0, 200.0));
        assert!(parse_range("200:20").is_err());
    }
}
