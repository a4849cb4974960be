//! Airbridge placement along CPW center lines.
//!
//! Paths are polylines in micrometers. Bridges sit at equal arc-length
//! steps from `end_margin`, crossing the line perpendicular to it: the
//! footprint is `length` across the path and `width` along it.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SPACING: f64 = 100.0;
pub const DEFAULT_END_MARGIN: f64 = 50.0;
pub const DEFAULT_LENGTH: f64 = 60.0;
pub const DEFAULT_WIDTH: f64 = 16.0;
pub const DEFAULT_CORNER_THRESHOLD_DEG: f64 = 10.0;
/// Tolerance for a placement center to count as on its path.
pub const ON_PATH_TOL: f64 = 1e-6;

const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Control,
    Readout,
    Resonator,
    GroundStrap,
}

impl Role {
    pub const ALL: [Role; 4] = [
        Role::Control,
        Role::Readout,
        Role::Resonator,
        Role::GroundStrap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Control => "control",
            Role::Readout => "readout",
            Role::Resonator => "resonator",
            Role::GroundStrap => "ground_strap",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown path role `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeStyle {
    Separate,
    FullCapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    LiftOff,
    Etching,
    Grayscale,
}

impl Process {
    /// Longest bridge the process holds up, in micrometers.
    pub fn max_length(self) -> f64 {
        match self {
            Process::LiftOff | Process::Etching => 60.0,
            Process::Grayscale => 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutPath {
    pub id: String,
    pub role: Role,
    pub trace_um: f64,
    pub gap_um: f64,
    pub vertices: Vec<[f64; 2]>,
}

impl LayoutPath {
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::Path {
            path: self.id.clone(),
            message,
        };
        if self.id.is_empty() {
            return Err(fail("id must not be empty".into()));
        }
        for (name, v) in [("trace_um", self.trace_um), ("gap_um", self.gap_um)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(fail(format!("{name} must be positive, got {v}")));
            }
        }
        if self.vertices.len() < 2 {
            return Err(fail(format!(
                "vertices: need at least 2, got {}",
                self.vertices.len()
            )));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(fail(format!("vertices[{i}] is not finite")));
            }
        }
        for (i, w) in self.vertices.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(fail(format!(
                    "vertices[{i}] and vertices[{}] coincide",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Cumulative arc length at each vertex.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.vertices.len());
        let mut s = 0.0;
        out.push(0.0);
        for w in self.vertices.windows(2) {
            s += dist(w[0], w[1]);
            out.push(s);
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Point and tangent angle at arc length `s`. At an interior vertex the
    /// outgoing segment is used.
    pub fn point_at(&self, s: f64) -> ([f64; 2], f64) {
        let arcs = self.arc_lengths();
        let n = self.vertices.len();
        let mut k = n - 2;
        for i in 0..n - 1 {
            if s < arcs[i + 1] {
                k = i;
                break;
            }
        }
        let (a, b) = (self.vertices[k], self.vertices[k + 1]);
        let seg = arcs[k + 1] - arcs[k];
        let t = ((s - arcs[k]) / seg).clamp(0.0, 1.0);
        let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        (p, (b[1] - a[1]).atan2(b[0] - a[0]))
    }

    /// Euclidean distance from `p` to the polyline.
    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Direction change at each interior vertex, in radians within [0, π].
    pub fn turn_angles(&self) -> Vec<f64> {
        self.vertices
            .windows(3)
            .map(|w| {
                let a = (w[1][1] - w[0][1]).atan2(w[1][0] - w[0][0]);
                let b = (w[2][1] - w[1][1]).atan2(w[2][0] - w[1][0]);
                let mut d = (b - a).abs() % (2.0 * PI);
                if d > PI {
                    d = 2.0 * PI - d;
                }
                d
            })
            .collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    paths: Vec<LayoutPath>,
}

/// Parses layout JSON, validates each path and returns the paths sorted by id.
pub fn parse_layout(text: &str) -> Result<Vec<LayoutPath>> {
    let file: LayoutFile = serde_json::from_str(text).map_err(|e| Error::LayoutSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut seen = BTreeSet::new();
    for p in &file.paths {
        p.validate()?;
        if !seen.insert(p.id.as_str()) {
            return Err(Error::Path {
                path: p.id.clone(),
                message: "duplicate path id".into(),
            });
        }
    }
    let mut paths = file.paths;
    paths.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(paths)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeRule {
    pub style: BridgeStyle,
    pub process: Process,
    pub length_um: f64,
    pub width_um: f64,
    pub spacing_um: f64,
    pub end_margin_um: f64,
    #[serde(default = "default_corner_threshold")]
    pub corner_threshold_deg: f64,
}

fn default_corner_threshold() -> f64 {
    DEFAULT_CORNER_THRESHOLD_DEG
}

impl BridgeRule {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| Error::Field {
            field: field.into(),
            message,
        };
        for (name, v) in [
            ("length_um", self.length_um),
            ("width_um", self.width_um),
            ("spacing_um", self.spacing_um),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(bad(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.end_margin_um >= 0.0) || !self.end_margin_um.is_finite() {
            return Err(bad(
                "end_margin_um",
                format!("must be non-negative, got {}", self.end_margin_um),
            ));
        }
        if !(0.0..180.0).contains(&self.corner_threshold_deg) {
            return Err(bad(
                "corner_threshold_deg",
                format!("must lie in [0, 180), got {}", self.corner_threshold_deg),
            ));
        }
        if self.spacing_um <= self.width_um {
            return Err(bad(
                "spacing_um",
                format!(
                    "{} must exceed the bridge width {}",
                    self.spacing_um, self.width_um
                ),
            ));
        }
        let limit = self.process.max_length();
        if self.length_um > limit {
            return Err(bad(
                "length_um",
                format!(
                    "{} exceeds the {:?} process limit of {limit} um",
                    self.length_um, self.process
                ),
            ));
        }
        Ok(())
    }

    /// Clearance a bridge center keeps from a vertex turning by `turn`
    /// radians, so that bridges on either side stay on their own side of
    /// the corner bisector.
    pub fn corner_exclusion(&self, turn: f64) -> f64 {
        0.5 * self.length_um * (0.5 * turn).tan() + 0.5 * self.width_um
    }
}

pub fn default_rule(role: Role) -> BridgeRule {
    default_rule_with(role, DEFAULT_SPACING, DEFAULT_END_MARGIN)
}

/// Control lines get full-capped bridges, everything else separate ones.
pub fn default_rule_with(role: Role, spacing_um: f64, end_margin_um: f64) -> BridgeRule {
    let style = match role {
        Role::Control => BridgeStyle::FullCapped,
        Role::Readout | Role::Resonator | Role::GroundStrap => BridgeStyle::Separate,
    };
    BridgeRule {
        style,
        process: Process::LiftOff,
        length_um: DEFAULT_LENGTH,
        width_um: DEFAULT_WIDTH,
        spacing_um,
        end_margin_um,
        corner_threshold_deg: DEFAULT_CORNER_THRESHOLD_DEG,
    }
}

/// Rule file: shared spacing and margin plus per-role overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(default)]
    pub spacing_um: Option<f64>,
    #[serde(default)]
    pub end_margin_um: Option<f64>,
    #[serde(default)]
    pub roles: BTreeMap<Role, BridgeRule>,
}

impl RuleConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RuleConfig = serde_json::from_str(text)?;
        for (role, rule) in &cfg.roles {
            rule.validate()
                .map_err(|e| e.context(format!("roles.{role}")))?;
        }
        Ok(cfg)
    }

    pub fn rule_for(&self, role: Role) -> BridgeRule {
        self.roles.get(&role).copied().unwrap_or_else(|| {
            default_rule_with(
                role,
                self.spacing_um.unwrap_or(DEFAULT_SPACING),
                self.end_margin_um.unwrap_or(DEFAULT_END_MARGIN),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePlacement {
    pub path_id: String,
    pub x_um: f64,
    pub y_um: f64,
    pub angle_rad: f64,
    pub style: BridgeStyle,
    pub length_um: f64,
    pub width_um: f64,
}

impl BridgePlacement {
    pub fn center(&self) -> [f64; 2] {
        [self.x_um, self.y_um]
    }

    /// Footprint corners, counter-clockwise.
    pub fn footprint(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.angle_rad.sin_cos();
        let along = [0.5 * self.width_um * c, 0.5 * self.width_um * s];
        let across = [-0.5 * self.length_um * s, 0.5 * self.length_um * c];
        let p = self.center();
        [
            [p[0] - along[0] - across[0], p[1] - along[1] - across[1]],
            [p[0] + along[0] - across[0], p[1] + along[1] - across[1]],
            [p[0] + along[0] + across[0], p[1] + along[1] + across[1]],
            [p[0] - along[0] + across[0], p[1] - along[1] + across[1]],
        ]
    }
}

/// Arc-length positions of the bridges on `path`.
///
/// Nominal positions are `m, m + s, …` up to `L − m`. A position that falls
/// within the exclusion zone of a vertex turning by more than the corner
/// threshold moves forward to the end of that zone; later positions keep at
/// least one spacing from their predecessor. Positions pushed past `L − m`
/// are dropped.
pub fn placement_positions(path: &LayoutPath, rule: &BridgeRule) -> Result<Vec<f64>> {
    path.validate()?;
    rule.validate()?;
    let total = path.length();
    let m = rule.end_margin_um;
    let usable = total - 2.0 * m;
    if usable < -GEOM_EPS * total.max(1.0) {
        return Err(Error::Path {
            path: path.id.clone(),
            message: format!(
                "too short for any bridge: length {total} um is below twice the end margin {m} um"
            ),
        });
    }
    let count = (usable.max(0.0) / rule.spacing_um + GEOM_EPS).floor() as usize + 1;

    let arcs = path.arc_lengths();
    let threshold = rule.corner_threshold_deg.to_radians();
    let zones: Vec<(f64, f64)> = path
        .turn_angles()
        .iter()
        .enumerate()
        .filter(|(_, t)| **t > threshold)
        .map(|(i, t)| {
            let e = rule.corner_exclusion(*t);
            (arcs[i + 1] - e, arcs[i + 1] + e)
        })
        .collect();

    let end = total - m + GEOM_EPS;
    let mut out = Vec::with_capacity(count);
    let mut prev: Option<f64> = None;
    for k in 0..count {
        let mut s = m + k as f64 * rule.spacing_um;
        if let Some(p) = prev {
            s = s.max(p + rule.spacing_um);
        }
        // zones are ordered by arc length; one forward pass settles every shift
        for &(lo, hi) in &zones {
            if s > lo + GEOM_EPS && s < hi - GEOM_EPS {
                s = hi;
            }
        }
        if s > end {
            break;
        }
        out.push(s.min(total));
        prev = Some(s);
    }
    Ok(out)
}

pub fn place_bridges(path: &LayoutPath, rule: &BridgeRule) -> Result<Vec<BridgePlacement>> {
    Ok(placement_positions(path, rule)?
        .into_iter()
        .map(|s| {
            let (p, angle) = path.point_at(s);
            BridgePlacement {
                path_id: path.id.clone(),
                x_um: p[0],
                y_um: p[1],
                angle_rad: angle,
                style: rule.style,
                length_um: rule.length_um,
                width_um: rule.width_um,
            }
        })
        .collect())
}

/// Places bridges on every path, ordered by path id then arc length.
pub fn place_layout(paths: &[LayoutPath], rules: &RuleConfig) -> Result<Vec<BridgePlacement>> {
    let mut sorted: Vec<&LayoutPath> = paths.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = Vec::new();
    for p in sorted {
        out.extend(place_bridges(p, &rules.rule_for(p.role))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Clearance {
        a: usize,
        b: usize,
        path_a: String,
        path_b: String,
        a_xy: [f64; 2],
        b_xy: [f64; 2],
        /// Edge-to-edge distance; negative when the footprints overlap.
        distance_um: f64,
        min_clearance_um: f64,
    },
    OffPath {
        index: usize,
        path_id: String,
        xy: [f64; 2],
        distance_um: f64,
    },
}

/// Reports footprint pairs closer than `min_clearance` and bridges whose
/// center is off its path. At zero clearance touching footprints pass.
pub fn check_placements(
    paths: &[LayoutPath],
    placements: &[BridgePlacement],
    min_clearance: f64,
) -> Result<Vec<Violation>> {
    if !(min_clearance >= 0.0) || !min_clearance.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "clearance must be non-negative, got {min_clearance}"
        )));
    }
    let by_id: BTreeMap<&str, &LayoutPath> = paths.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut out = Vec::new();
    let mut feet = Vec::with_capacity(placements.len());
    for (i, b) in placements.iter().enumerate() {
        let path = by_id
            .get(b.path_id.as_str())
            .ok_or_else(|| Error::DanglingPath(b.path_id.clone()))?;
        for (name, v) in [("length_um", b.length_um), ("width_um", b.width_um)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Field {
                    field: format!("placements[{i}].{name}"),
                    message: format!("must be positive, got {v}"),
                });
            }
        }
        let d = path.distance_to(b.center());
        if d > ON_PATH_TOL {
            out.push(Violation::OffPath {
                index: i,
                path_id: b.path_id.clone(),
                xy: b.center(),
                distance_um: d,
            });
        }
        feet.push(b.footprint());
    }
    for i in 0..placements.len() {
        for j in i + 1..placements.len() {
            let d = rect_distance(&feet[i], &feet[j]);
            if d < min_clearance - GEOM_EPS {
                out.push(Violation::Clearance {
                    a: i,
                    b: j,
                    path_a: placements[i].path_id.clone(),
                    path_b: placements[j].path_id.clone(),
                    a_xy: placements[i].center(),
                    b_xy: placements[j].center(),
                    distance_um: d,
                    min_clearance_um: min_clearance,
                });
            }
        }
    }
    Ok(out)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn segment_distance(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Signed separation of two convex quadrilaterals: the edge-to-edge
/// distance when apart, minus the smallest axis overlap when they overlap.
fn rect_distance(p: &[[f64; 2]; 4], q: &[[f64; 2]; 4]) -> f64 {
    let mut overlap = f64::INFINITY;
    let mut separated = false;
    for poly in [p, q] {
        for k in 0..2 {
            let e = [poly[k + 1][0] - poly[k][0], poly[k + 1][1] - poly[k][1]];
            let n = e[0].hypot(e[1]);
            let axis = [-e[1] / n, e[0] / n];
            let proj = |r: &[[f64; 2]; 4]| {
                r.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        let t = v[0] * axis[0] + v[1] * axis[1];
                        (lo.min(t), hi.max(t))
                    })
            };
            let (a0, a1) = proj(p);
            let (b0, b1) = proj(q);
            let o = a1.min(b1) - a0.max(b0);
            if o <= 0.0 {
                separated = true;
            }
            overlap = overlap.min(o);
        }
    }
    if !separated {
        return -overlap;
    }
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            best = best.min(segment_distance(p[i], p[(i + 1) % 4], q[j], q[(j + 1) % 4]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(id: &str, role: Role, vertices: Vec<[f64; 2]>) -> LayoutPath {
        LayoutPath {
            id: id.into(),
            role,
            trace_um: 10.0,
            gap_um: 6.0,
            vertices,
        }
    }

    #[test]
    fn parse_single_path() {
        let paths = parse_layout(
            r#"{"paths":[{"id":"c1","role":"control","trace_um":10,"gap_um":6,"vertices":[[0,0],[1000,0]]}]}"#,
        )
        .unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].role, Role::Control);
        assert_eq!(paths[0].length(), 1000.0);
    }

    #[test]
    fn parse_empty_and_sorted() {
        assert!(parse_layout(r#"{"paths":[]}"#).unwrap().is_empty());
        let paths = parse_layout(
            r#"{"paths":[
              {"id":"b","role":"readout","trace_um":10,"gap_um":6,"vertices":[[0,0],[1,0]]},
              {"id":"a","role":"resonator","trace_um":10,"gap_um":6,"vertices":[[0,0],[1,0]]}]}"#,
        )
        .unwrap();
        assert_eq!(paths[0].id, "a");
    }

    #[test]
    fn parse_errors() {
        let e = parse_layout(
            r#"{"paths":[{"id":"ro7","role":"readout","trace_um":10,"gap_um":6,"vertices":[[0,0]]}]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("ro7"));
        let e = parse_layout("{\"paths\":[\n  {\"id\":\"x\",\"role\":\"bus\"}]}").unwrap_err();
        assert!(matches!(e, Error::LayoutSyntax { line: 2, .. }), "{e}");
        let dup = r#"{"paths":[
          {"id":"a","role":"readout","trace_um":10,"gap_um":6,"vertices":[[0,0],[1,0]]},
          {"id":"a","role":"readout","trace_um":10,"gap_um":6,"vertices":[[0,0],[2,0]]}]}"#;
        assert!(parse_layout(dup).is_err());
    }

    #[test]
    fn default_styles() {
        assert_eq!(default_rule(Role::Control).style, BridgeStyle::FullCapped);
        assert_eq!(default_rule(Role::Readout).style, BridgeStyle::Separate);
        assert_eq!(default_rule(Role::Resonator).style, BridgeStyle::Separate);
        assert_eq!(default_rule(Role::GroundStrap).style, BridgeStyle::Separate);
        assert!("bus".parse::<Role>().is_err());
    }

    #[test]
    fn straight_path_positions() {
        let p = path("c", Role::Control, vec![[0.0, 0.0], [1000.0, 0.0]]);
        let b = place_bridges(&p, &default_rule(Role::Control)).unwrap();
        let xs: Vec<f64> = b.iter().map(|b| b.x_um).collect();
        assert_eq!(
            xs,
            (0..10).map(|k| 50.0 + 100.0 * k as f64).collect::<Vec<_>>()
        );
    }

    #[test]
    fn too_short() {
        let p = path("c", Role::Control, vec![[0.0, 0.0], [99.0, 0.0]]);
        assert!(place_bridges(&p, &default_rule(Role::Control)).is_err());
    }

    #[test]
    fn process_limit() {
        let mut rule = default_rule(Role::Readout);
        rule.length_um = 80.0;
        let p = path("r", Role::Readout, vec![[0.0, 0.0], [1000.0, 0.0]]);
        assert!(place_bridges(&p, &rule).is_err());
        rule.process = Process::Grayscale;
        assert!(place_bridges(&p, &rule).is_ok());
    }

    #[test]
    fn l_path() {
        let p = path(
            "l",
            Role::Readout,
            vec![[0.0, 0.0], [500.0, 0.0], [500.0, 500.0]],
        );
        let b = place_bridges(&p, &default_rule(Role::Readout)).unwrap();
        assert_eq!(b.len(), 10);
        for x in &b {
            assert!(dist(x.center(), [500.0, 0.0]) >= 16.0);
            assert!(x.angle_rad == 0.0 || (x.angle_rad - PI / 2.0).abs() < 1e-15);
        }
        assert!(check_placements(&[p], &b, 0.0).unwrap().is_empty());
    }

    #[test]
    fn corner_shift() {
        // corner at arc 530: the bridge nominally at 550 is within 38 um
        let p = path(
            "l",
            Role::Readout,
            vec![[0.0, 0.0], [530.0, 0.0], [530.0, 500.0]],
        );
        let rule = default_rule(Role::Readout);
        let s = placement_positions(&p, &rule).unwrap();
        assert!((s[5] - 568.0).abs() < 1e-9, "{s:?}");
        assert!(s.windows(2).all(|w| w[1] - w[0] >= rule.spacing_um - 1e-9));
        let b = place_bridges(&p, &rule).unwrap();
        assert!(check_placements(&[p], &b, 0.0).unwrap().is_empty());
    }

    #[test]
    fn clearance_parallel_paths() {
        let a = path("a", Role::Readout, vec![[0.0, 0.0], [1000.0, 0.0]]);
        let b = path("b", Role::Readout, vec![[0.0, 10.0], [1000.0, 10.0]]);
        let rule = default_rule(Role::Readout);
        let mut all = place_bridges(&a, &rule).unwrap();
        all.extend(place_bridges(&b, &rule).unwrap());
        let v = check_placements(&[a.clone(), b], &all, 20.0).unwrap();
        assert_eq!(v.len(), 10);
        let single = check_placements(std::slice::from_ref(&a), &all[..1], 20.0).unwrap();
        assert!(single.is_empty());
    }

    #[test]
    fn off_path_and_dangling() {
        let a = path("a", Role::Readout, vec![[0.0, 0.0], [1000.0, 0.0]]);
        let mut b = place_bridges(&a, &default_rule(Role::Readout)).unwrap();
        b[0].y_um = 1.0;
        let v = check_placements(std::slice::from_ref(&a), &b, 0.0).unwrap();
        assert!(matches!(v[0], Violation::OffPath { index: 0, .. }));
        b[0].path_id = "zz".into();
        assert!(matches!(
            check_placements(&[a], &b, 0.0),
            Err(Error::DanglingPath(_))
        ));
    }

    #[test]
    fn rectangle_distance() {
        let mk = |x: f64, y: f64, angle: f64| BridgePlacement {
            path_id: "p".into(),
            x_um: x,
            y_um: y,
            angle_rad: angle,
            style: BridgeStyle::Separate,
            length_um: 60.0,
            width_um: 16.0,
        };
        let a = mk(0.0, 0.0, 0.0).footprint();
        assert!((rect_distance(&a, &mk(100.0, 0.0, 0.0).footprint()) - 84.0).abs() < 1e-12);
        assert!((rect_distance(&a, &mk(0.0, 70.0, 0.0).footprint()) - 10.0).abs() < 1e-12);
        assert!((rect_distance(&a, &mk(0.0, 10.0, 0.0).footprint()) + 16.0).abs() < 1e-12);
        // corner to corner along the diagonal
        let d = rect_distance(
            &a,
            &mk(8.0 + 10.0 + 8.0, 30.0 + 10.0 + 30.0, 0.0).footprint(),
        );
        assert!((d - 200f64.sqrt()).abs() < 1e-12);
    }
}
