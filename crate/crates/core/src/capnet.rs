//! Lumped capacitance networks and the matrix algebra that turns them into
//! qubit-mode inverse capacitances.
//!
//! The pipeline is
//!
//! 1. [`build_matrix`]: node network to Maxwell capacitance matrix `C`
//!    (diagonal = total capacitance attached to the node, off-diagonal =
//!    minus the mutual capacitance),
//! 2. [`floating_pair_transform`]: node fluxes to sum (free) and difference
//!    (qubit) modes for each floating transmon,
//! 3. [`transform_matrix`]: `C̃ = (S⁻¹)ᵀ C S⁻¹`,
//! 4. [`reduce_and_invert`]: invert the full `C̃` and keep the qubit block.
//!
//! All capacitances are in femtofarads.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matrices with a condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceNetwork {
    nodes: Vec<String>,
    ground: BTreeMap<String, f64>,
    pairs: BTreeMap<(String, String), f64>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn check_capacitance(what: impl FnOnce() -> String, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::NegativeCapacitance {
            what: what(),
            value,
        });
    }
    Ok(())
}

impl CapacitanceNetwork {
    pub fn new<I, S>(nodes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for n in nodes {
            let n = n.into();
            if !seen.insert(n.clone()) {
                return Err(Error::DuplicateNode(n));
            }
            list.push(n);
        }
        Ok(Self {
            nodes: list,
            ground: BTreeMap::new(),
            pairs: BTreeMap::new(),
        })
    }

    fn require(&self, node: &str) -> Result<()> {
        if self.nodes.iter().any(|n| n == node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node.to_string()))
        }
    }

    /// Sets the capacitance from `node` to ground.
    pub fn set_ground(&mut self, node: &str, c_ff: f64) -> Result<()> {
        self.require(node)?;
        check_capacitance(|| format!("ground of node `{node}`"), c_ff)?;
        self.ground.insert(node.to_string(), c_ff);
        Ok(())
    }

    /// Sets the mutual capacitance between two distinct nodes. Order of
    /// `a` and `b` is irrelevant.
    pub fn set_pair(&mut self, a: &str, b: &str, c_ff: f64) -> Result<()> {
        self.require(a)?;
        self.require(b)?;
        if a == b {
            return Err(Error::SelfPair(a.to_string()));
        }
        check_capacitance(|| format!("pair ({a}, {b})"), c_ff)?;
        self.pairs.insert(pair_key(a, b), c_ff);
        Ok(())
    }

    pub fn with_ground(mut self, node: &str, c_ff: f64) -> Result<Self> {
        self.set_ground(node, c_ff)?;
        Ok(self)
    }

    pub fn with_pair(mut self, a: &str, b: &str, c_ff: f64) -> Result<Self> {
        self.set_pair(a, b, c_ff)?;
        Ok(self)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn ground(&self, node: &str) -> f64 {
        self.ground.get(node).copied().unwrap_or(0.0)
    }

    pub fn pair(&self, a: &str, b: &str) -> f64 {
        self.pairs.get(&pair_key(a, b)).copied().unwrap_or(0.0)
    }

    /// Non-zero-keyed pair capacitances, each unordered pair once.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.pairs
            .iter()
            .map(|((a, b), c)| (a.as_str(), b.as_str(), *c))
    }

    /// Sum of ground and all pair capacitances touching `node`.
    pub fn total(&self, node: &str) -> f64 {
        self.ground(node)
            + self
                .pairs()
                .filter(|(a, b, _)| *a == node || *b == node)
                .map(|(_, _, c)| c)
                .sum::<f64>()
    }

    /// Every capacitance multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale factor {k} must be positive"
            )));
        }
        Ok(Self {
            nodes: self.nodes.clone(),
            ground: self
                .ground
                .iter()
                .map(|(n, c)| (n.clone(), c * k))
                .collect(),
            pairs: self.pairs.iter().map(|(p, c)| (p.clone(), c * k)).collect(),
        })
    }

    fn validate(&self) -> Result<()> {
        for (n, c) in &self.ground {
            check_capacitance(|| format!("ground of node `{n}`"), *c)?;
        }
        for ((a, b), c) in &self.pairs {
            if a == b {
                return Err(Error::SelfPair(a.clone()));
            }
            check_capacitance(|| format!("pair ({a}, {b})"), *c)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetlistFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }

    pub fn to_file(&self) -> NetlistFile {
        NetlistFile {
            nodes: self.nodes.clone(),
            ground: self.ground.clone(),
            pairs: self
                .pairs()
                .map(|(a, b, c)| PairEntry {
                    a: a.to_string(),
                    b: b.to_string(),
                    c_ff: c,
                })
                .collect(),
        }
    }
}

/// On-disk netlist schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub ground: BTreeMap<String, f64>,
    #[serde(default)]
    pub pairs: Vec<PairEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub a: String,
    pub b: String,
    #[serde(rename = "c_fF")]
    pub c_ff: f64,
}

impl TryFrom<NetlistFile> for CapacitanceNetwork {
    type Error = Error;

    fn try_from(file: NetlistFile) -> Result<Self> {
        let mut net = CapacitanceNetwork::new(file.nodes)?;
        for (node, c) in &file.ground {
            net.set_ground(node, *c).map_err(|e| e.context("ground"))?;
        }
        for (i, p) in file.pairs.iter().enumerate() {
            if net.pairs.contains_key(&pair_key(&p.a, &p.b)) {
                return Err(Error::Field {
                    field: format!("pairs[{i}]"),
                    message: format!("duplicate pair ({}, {})", p.a, p.b),
                });
            }
            net.set_pair(&p.a, &p.b, p.c_ff)
                .map_err(|e| e.context(format!("pairs[{i}]")))?;
        }
        Ok(net)
    }
}

/// Square symmetric matrix with labelled rows/columns (fF).
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceMatrix {
    pub labels: Vec<String>,
    pub entries: DMatrix<f64>,
}

impl CapacitanceMatrix {
    pub fn new(labels: Vec<String>, entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if labels.len() != entries.nrows() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: labels.len(),
            });
        }
        Ok(Self { labels, entries })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn get(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.entries[(self.index(a)?, self.index(b)?)])
    }

    /// Reorders rows and columns to `order`, which must be a permutation of
    /// the labels.
    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: order.len(),
            });
        }
        let idx = order
            .iter()
            .map(|l| self.index(l))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = BTreeSet::new();
        for l in order {
            if !seen.insert(*l) {
                return Err(Error::OrderMismatch(format!("`{l}` repeated")));
            }
        }
        let n = self.dim();
        let entries = DMatrix::from_fn(n, n, |i, j| self.entries[(idx[i], idx[j])]);
        Ok(Self {
            labels: order.iter().map(|s| s.to_string()).collect(),
            entries,
        })
    }
}

/// Builds the Maxwell capacitance matrix in the given node order.
pub fn build_matrix(net: &CapacitanceNetwork, order: &[&str]) -> Result<CapacitanceMatrix> {
    net.validate()?;
    if order.len() != net.nodes.len() {
        return Err(Error::OrderMismatch(format!(
            "order has {} labels, network has {} nodes",
            order.len(),
            net.nodes.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for l in order {
        net.require(l)?;
        if !seen.insert(*l) {
            return Err(Error::OrderMismatch(format!("`{l}` repeated")));
        }
    }
    let n = order.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, a) in order.iter().enumerate() {
        m[(i, i)] = net.total(a);
        for (j, b) in order.iter().enumerate() {
            if i != j {
                m[(i, j)] = -net.pair(a, b);
            }
        }
    }
    CapacitanceMatrix::new(order.iter().map(|s| s.to_string()).collect(), m)
}

/// Builds the matrix in the network's own node order.
pub fn build_matrix_default(net: &CapacitanceNetwork) -> Result<CapacitanceMatrix> {
    let order: Vec<&str> = net.nodes.iter().map(String::as_str).collect();
    build_matrix(net, &order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    /// Sum mode of a floating pair; carries no Josephson potential.
    Free,
    /// Difference mode of a floating pair.
    Qubit,
    /// Node flux passed through unchanged (couplers, airbridge islands).
    Intermediate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    pub kind: ModeKind,
}

/// Linear change of flux variables `Φ̃ = S Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    pub matrix: DMatrix<f64>,
    pub modes: Vec<Mode>,
    /// Node labels matching the matrix columns.
    pub inputs: Vec<String>,
}

impl ModeTransform {
    pub fn new(matrix: DMatrix<f64>, modes: Vec<Mode>, inputs: Vec<String>) -> Result<Self> {
        let n = matrix.nrows();
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        for len in [modes.len(), inputs.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        Ok(Self {
            matrix,
            modes,
            inputs,
        })
    }

    pub fn identity(nodes: &[&str]) -> Self {
        let n = nodes.len();
        Self {
            matrix: DMatrix::identity(n, n),
            modes: nodes
                .iter()
                .map(|l| Mode {
                    label: l.to_string(),
                    kind: ModeKind::Intermediate,
                })
                .collect(),
            inputs: nodes.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn mode_labels(&self) -> Vec<&str> {
        self.modes.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn labels_of(&self, kind: ModeKind) -> Vec<&str> {
        self.modes
            .iter()
            .filter(|m| m.kind == kind)
            .map(|m| m.label.as_str())
            .collect()
    }
}

/// Label of the sum (free) mode of the pair `(a, b)`.
pub fn sum_mode_label(a: &str, b: &str) -> String {
    format!("{a}+{b}")
}

/// Label of the difference mode `Φ_b − Φ_a` of the pair `(a, b)`.
pub fn difference_mode_label(a: &str, b: &str) -> String {
    format!("{b}-{a}")
}

/// Floating-pair transform over the node order `nodes`.
///
/// Each pair `(a, b)` contributes a free mode `Φ_a + Φ_b` followed by a
/// qubit mode `Φ_b − Φ_a`, emitted at the position of whichever of `a`, `b`
/// comes first in `nodes`. Passthrough nodes keep their own row.
pub fn floating_pair_transform(
    nodes: &[&str],
    pairs: &[(&str, &str)],
    passthrough: &[&str],
) -> Result<ModeTransform> {
    let mut owner: BTreeMap<&str, Option<usize>> = BTreeMap::new();
    for (k, (a, b)) in pairs.iter().enumerate() {
        if a == b {
            return Err(Error::SelfPair(a.to_string()));
        }
        for n in [a, b] {
            if owner.insert(n, Some(k)).is_some() {
                return Err(Error::OverlappingPartition(n.to_string()));
            }
        }
    }
    for n in passthrough {
        if owner.insert(n, None).is_some() {
            return Err(Error::OverlappingPartition(n.to_string()));
        }
    }
    let mut seen = BTreeSet::new();
    for n in nodes {
        if !seen.insert(*n) {
            return Err(Error::OrderMismatch(format!("`{n}` repeated")));
        }
        if !owner.contains_key(n) {
            return Err(Error::OrderMismatch(format!(
                "node `{n}` is neither paired nor passed through"
            )));
        }
    }
    if let Some(extra) = owner.keys().find(|k| !seen.contains(*k)) {
        return Err(Error::UnknownNode(extra.to_string()));
    }

    let col = |label: &str| nodes.iter().position(|n| *n == label).expect("checked");
    let dim = nodes.len();
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut modes = Vec::with_capacity(dim);
    let mut emitted = vec![false; pairs.len()];
    for n in nodes {
        match owner[n] {
            None => {
                matrix[(modes.len(), col(n))] = 1.0;
                modes.push(Mode {
                    label: n.to_string(),
                    kind: ModeKind::Intermediate,
                });
            }
            Some(k) if !emitted[k] => {
                emitted[k] = true;
                let (a, b) = pairs[k];
                let row = modes.len();
                matrix[(row, col(a))] = 1.0;
                matrix[(row, col(b))] = 1.0;
                matrix[(row + 1, col(a))] = -1.0;
                matrix[(row + 1, col(b))] = 1.0;
                modes.push(Mode {
                    label: sum_mode_label(a, b),
                    kind: ModeKind::Free,
                });
                modes.push(Mode {
                    label: difference_mode_label(a, b),
                    kind: ModeKind::Qubit,
                });
            }
            Some(_) => {}
        }
    }
    ModeTransform::new(matrix, modes, nodes.iter().map(|s| s.to_string()).collect())
}

/// Ratio of largest to smallest singular value, and the column index that
/// dominates the weakest singular vector.
pub(crate) fn condition(m: &DMatrix<f64>) -> (f64, usize) {
    let svd = m.clone().svd(false, true);
    let s = &svd.singular_values;
    let (imin, smin) =
        s.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc },
        );
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let weakest = svd
        .v_t
        .as_ref()
        .map(|vt| {
            vt.row(imin)
                .iter()
                .enumerate()
                .fold(
                    (0, 0.0),
                    |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc },
                )
                .0
        })
        .unwrap_or(0);
    let cond = if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    };
    (cond, weakest)
}

fn check_condition(m: &DMatrix<f64>, labels: &[String]) -> Result<()> {
    let (cond, weakest) = condition(m);
    let mode = labels.get(weakest).cloned();
    if !cond.is_finite() {
        return Err(Error::Singular { mode });
    }
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned {
            cond,
            limit: MAX_CONDITION,
            mode,
        });
    }
    Ok(())
}

/// Solves `A X = B` by LU with partial pivoting.
fn lu_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, labels: &[String]) -> Result<DMatrix<f64>> {
    a.clone().lu().solve(b).ok_or_else(|| Error::Singular {
        mode: labels.get(condition(a).1).cloned(),
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Congruence transform `C̃ = (S⁻¹)ᵀ C S⁻¹`, computed with two linear solves.
///
/// `C` is permuted to the transform's input order first if its labels are in
/// a different order.
pub fn transform_matrix(c: &CapacitanceMatrix, s: &ModeTransform) -> Result<CapacitanceMatrix> {
    if c.dim() != s.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: s.matrix.nrows(),
            found: c.dim(),
        });
    }
    let c = if c.labels == s.inputs {
        c.clone()
    } else {
        let order: Vec<&str> = s.inputs.iter().map(String::as_str).collect();
        c.permuted(&order)?
    };
    let labels: Vec<String> = s.modes.iter().map(|m| m.label.clone()).collect();
    check_condition(&s.matrix, &labels)?;
    let st = s.matrix.transpose();
    // Y = S⁻ᵀ C, then C̃ᵀ = S⁻ᵀ Yᵀ.
    let y = lu_solve(&st, &c.entries, &labels)?;
    let z = lu_solve(&st, &y.transpose(), &labels)?;
    let mut out = z.transpose();
    symmetrize(&mut out);
    CapacitanceMatrix::new(labels, out)
}

/// Inverse-capacitance block for the retained modes (1/fF).
#[derive(Debug, Clone, PartialEq)]
pub struct InverseBlock {
    pub labels: Vec<String>,
    pub entries: DMatrix<f64>,
}

impl InverseBlock {
    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn get(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.entries[(self.index(a)?, self.index(b)?)])
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

/// Full inverse of a labelled matrix, via LU solve against the identity.
pub fn invert(ct: &CapacitanceMatrix) -> Result<DMatrix<f64>> {
    check_condition(&ct.entries, &ct.labels)?;
    let n = ct.dim();
    let mut inv = lu_solve(&ct.entries, &DMatrix::identity(n, n), &ct.labels)?;
    symmetrize(&mut inv);
    Ok(inv)
}

/// Inverts the whole transformed matrix, then keeps the `keep` rows and
/// columns. Free modes take part in the inversion.
pub fn reduce_and_invert(ct: &CapacitanceMatrix, keep: &[&str]) -> Result<InverseBlock> {
    let idx = keep
        .iter()
        .map(|l| ct.index(l))
        .collect::<Result<Vec<_>>>()?;
    let inv = invert(ct)?;
    let k = idx.len();
    let entries = DMatrix::from_fn(k, k, |i, j| inv[(idx[i], idx[j])]);
    for (i, l) in keep.iter().enumerate() {
        if !(entries[(i, i)] > 0.0) {
            return Err(Error::Degenerate(format!(
                "inverse capacitance of mode `{l}` is not positive"
            )));
        }
    }
    Ok(InverseBlock {
        labels: keep.iter().map(|s| s.to_string()).collect(),
        entries,
    })
}
