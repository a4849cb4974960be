//! Transmon parameters from inverse capacitances and SQUID junctions.
//!
//! Energies are E/h in GHz. The charging energy of a qubit mode is
//! `E_C = (e²/2h)·A_ii` and the charge coupling `E_12 = (e²/2h)·A_12`, where
//! `A` is the inverse-capacitance block from [`crate::capnet`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::capnet::{
    self, build_matrix_default, difference_mode_label, floating_pair_transform, reduce_and_invert,
    transform_matrix, CapacitanceNetwork, InverseBlock,
};
use crate::error::{Error, Result, ResultExt};
use crate::format::round_decimals;
use crate::units::CHARGING_FF_GHZ;

/// Asymmetric dc-SQUID. Energies in GHz, flux bias in radians of phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquidSpec {
    pub ej_small: f64,
    pub ej_large: f64,
    pub phi_ext: f64,
}

impl SquidSpec {
    pub fn new(ej_small: f64, ej_large: f64, phi_ext: f64) -> Result<Self> {
        if !(ej_small >= 0.0) || !ej_large.is_finite() || !phi_ext.is_finite() {
            return Err(Error::InvalidSquid(format!(
                "energies must be finite and non-negative (E_Js = {ej_small}, E_Jl = {ej_large}, phi = {phi_ext})"
            )));
        }
        if ej_small > ej_large {
            return Err(Error::InvalidSquid(format!(
                "E_Js = {ej_small} exceeds E_Jl = {ej_large}"
            )));
        }
        Ok(Self {
            ej_small,
            ej_large,
            phi_ext,
        })
    }

    /// Single junction (or a symmetric SQUID at zero flux) of energy `ej`.
    pub fn fixed(ej: f64) -> Result<Self> {
        Self::new(0.0, ej, 0.0)
    }
}

/// Flux-tuned Josephson energy
/// `sqrt(E_Js² + E_Jl² + 2 E_Js E_Jl cos φ_e)`.
///
/// Evaluated as `sqrt((Σ cos(φ/2))² + (Δ sin(φ/2))²)`, which is the same
/// quantity but never goes negative under rounding.
pub fn squid_effective_ej(s: &SquidSpec) -> f64 {
    let sum = s.ej_small + s.ej_large;
    let diff = s.ej_large - s.ej_small;
    let half = 0.5 * s.phi_ext;
    (sum * half.cos()).hypot(diff * half.sin())
}

/// Phase offset `atan[((E_Js − E_Jl)/(E_Js + E_Jl)) tan(φ_e/2)]`, in
/// `(−π/2, π/2]`.
pub fn squid_phase_offset(s: &SquidSpec) -> Result<f64> {
    let sum = s.ej_small + s.ej_large;
    if sum <= 0.0 {
        return Err(Error::InvalidSquid(
            "E_Js = E_Jl = 0 has no phase offset".into(),
        ));
    }
    let ratio = (s.ej_small - s.ej_large) / sum;
    if ratio == 0.0 {
        return Ok(0.0);
    }
    let phi = (ratio * (0.5 * s.phi_ext).tan()).atan();
    // `+ 0.0` turns a signed zero into +0
    Ok(if phi <= -FRAC_PI_2 {
        FRAC_PI_2
    } else {
        phi + 0.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonOptions {
    /// Smallest accepted E_J/E_C.
    pub min_ratio: f64,
}

impl Default for TransmonOptions {
    fn default() -> Self {
        Self { min_ratio: 10.0 }
    }
}

/// Perturbative transmon parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub ec: f64,
    pub ej: f64,
    pub xi: f64,
    pub omega: f64,
    /// ω12 − ω01 from the fourth-order ladder, `−E_C(1 + 9ξ/16)`.
    pub alpha: f64,
    /// Leading-order `−E_C`.
    pub alpha_simple: f64,
    pub n_zpf: f64,
    pub phi_zpf: f64,
    pub phi0: f64,
}

pub fn transmon_params(ec: f64, ej: f64) -> Result<QubitParams> {
    transmon_params_with(ec, ej, &TransmonOptions::default())
}

pub fn transmon_params_with(ec: f64, ej: f64, opts: &TransmonOptions) -> Result<QubitParams> {
    if !(ec > 0.0) || !ec.is_finite() || !ej.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "E_C must be positive and finite (E_C = {ec}, E_J = {ej})"
        )));
    }
    let ratio = ej / ec;
    if !(ratio >= opts.min_ratio) {
        return Err(Error::Regime {
            ec,
            ej,
            ratio,
            min_ratio: opts.min_ratio,
        });
    }
    let xi = (2.0 * ec / ej).sqrt();
    let omega = (8.0 * ej * ec).sqrt() - ec * (1.0 + xi / 4.0);
    let alpha = -ec * (1.0 + 9.0 * xi / 16.0);
    let n_zpf = FRAC_1_SQRT_2 * (ej / (8.0 * ec)).powf(0.25);
    let phi_zpf = FRAC_1_SQRT_2 * (8.0 * ec / ej).powf(0.25);
    Ok(QubitParams {
        ec,
        ej,
        xi,
        omega,
        alpha,
        alpha_simple: -ec,
        n_zpf,
        phi_zpf,
        phi0: 0.0,
    })
}

/// Transmon parameters for a SQUID-shunted mode: E_J and φ_0 from the SQUID.
pub fn squid_transmon(ec: f64, squid: &SquidSpec, opts: &TransmonOptions) -> Result<QubitParams> {
    let mut q = transmon_params_with(ec, squid_effective_ej(squid), opts)?;
    q.phi0 = squid_phase_offset(squid)?;
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub e12: f64,
    pub j12: f64,
}

/// Exchange coupling from a charge coupling `E_12` (GHz):
/// `J = E_12/√2 · (E_J1 E_J2 / E_C1 E_C2)^¼ · [1 − (ξ1 + ξ2)/8]`.
pub fn exchange_coupling(e12: f64, q1: &QubitParams, q2: &QubitParams) -> CouplingParams {
    let scale = ((q1.ej * q2.ej) / (q1.ec * q2.ec)).powf(0.25);
    let j12 = e12 * FRAC_1_SQRT_2 * scale * (1.0 - (q1.xi + q2.xi) / 8.0);
    CouplingParams { e12, j12 }
}

/// Coupling between the two modes of a 2×2 inverse block.
pub fn coupling_params(
    a: &InverseBlock,
    q1: &QubitParams,
    q2: &QubitParams,
) -> Result<CouplingParams> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.dim(),
        });
    }
    Ok(exchange_coupling(
        CHARGING_FF_GHZ * a.entries[(0, 1)],
        q1,
        q2,
    ))
}

/// Levels of the charge-basis transmon whose boundary weight is checked.
pub const CHECKED_LEVELS: usize = 3;
/// Largest tolerated probability on the `|n| = n_max` charge states.
pub const BOUNDARY_WEIGHT_LIMIT: f64 = 1e-8;
pub const DEFAULT_N_MAX: usize = 20;

/// Exact single-transmon spectrum in the truncated charge basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSpectrum {
    /// Eigenfrequencies in GHz, ascending, ground level at 0.
    pub levels: Vec<f64>,
    /// Boundary weight of each level's eigenvector.
    pub boundary_weight: Vec<f64>,
}

impl ChargeSpectrum {
    pub fn omega01(&self) -> f64 {
        self.levels[1]
    }

    /// ω12 − ω01.
    pub fn anharmonicity(&self) -> f64 {
        self.levels[2] - 2.0 * self.levels[1]
    }
}

/// Diagonalizes `4 E_C n² − (E_J/2)(|n⟩⟨n+1| + h.c.)` for
/// `n ∈ [−n_max, n_max]` at zero offset charge.
///
/// Fails if any of the lowest [`CHECKED_LEVELS`] eigenvectors puts more than
/// [`BOUNDARY_WEIGHT_LIMIT`] probability on the truncation boundary.
pub fn charge_basis_spectrum(ec: f64, ej: f64, n_max: usize) -> Result<ChargeSpectrum> {
    if n_max < 10 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must be at least 10"
        )));
    }
    if !(ec >= 0.0) || !ec.is_finite() || !ej.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "invalid energies E_C = {ec}, E_J = {ej}"
        )));
    }
    let dim = 2 * n_max + 1;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let n = i as f64 - n_max as f64;
        h[(i, i)] = 4.0 * ec * n * n;
        if i + 1 < dim {
            h[(i, i + 1)] = -0.5 * ej;
            h[(i + 1, i)] = -0.5 * ej;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let ground = eig.eigenvalues[order[0]];
    let mut levels = Vec::with_capacity(dim);
    let mut boundary_weight = Vec::with_capacity(dim);
    for &k in &order {
        levels.push(eig.eigenvalues[k] - ground);
        let v = eig.eigenvectors.column(k);
        boundary_weight.push(v[0] * v[0] + v[dim - 1] * v[dim - 1]);
    }
    for (level, &weight) in boundary_weight.iter().enumerate().take(CHECKED_LEVELS) {
        if weight > BOUNDARY_WEIGHT_LIMIT {
            return Err(Error::Truncation {
                n_max,
                level,
                weight,
            });
        }
    }
    Ok(ChargeSpectrum {
        levels,
        boundary_weight,
    })
}

/// Excited-state population after time `t` (ns) for two levels exchanging at
/// `j` (GHz) with detuning `detuning` (GHz):
/// `(j²/Ω²) sin²(2π Ω t)` with `Ω² = j² + Δ²/4`.
pub fn swap_oscillation(j: f64, detuning: f64, t: f64) -> f64 {
    let omega_sq = j * j + 0.25 * detuning * detuning;
    if omega_sq == 0.0 {
        return 0.0;
    }
    let s = (2.0 * PI * omega_sq.sqrt() * t).sin();
    (j * j / omega_sq) * s * s
}

/// Period (ns) of the population oscillation; `1/(2j)` on resonance.
pub fn swap_period(j: f64, detuning: f64) -> f64 {
    0.5 / (j * j + 0.25 * detuning * detuning).sqrt()
}

/// E_J (GHz) that puts the perturbative ω at `target_omega`, by bisection to
/// `1e-6` GHz.
pub fn calibrate_ej(ec: f64, target_omega: f64, opts: &TransmonOptions) -> Result<f64> {
    let omega = |ej: f64| transmon_params_with(ec, ej, opts).map(|q| q.omega);
    let mut lo = opts.min_ratio * ec;
    if omega(lo)? > target_omega {
        return Err(Error::InvalidArgument(format!(
            "target ω = {target_omega} GHz is below the regime guard for E_C = {ec} GHz"
        )));
    }
    let mut hi = 2.0 * lo;
    while omega(hi)? < target_omega {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::InvalidArgument(format!(
                "target ω = {target_omega} GHz unreachable"
            )));
        }
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if omega(mid)? < target_omega {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A floating qubit: its two pad nodes and its SQUID.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpec {
    pub pads: (String, String),
    pub squid: SquidSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub network: CapacitanceNetwork,
    pub qubits: Vec<QubitSpec>,
}

/// Design input file: a netlist plus one SQUID per floating qubit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub ground: std::collections::BTreeMap<String, f64>,
    #[serde(default)]
    pub pairs: Vec<capnet::PairEntry>,
    #[serde(default)]
    pub squids: Vec<SquidEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidEntry {
    pub qubit: [String; 2],
    #[serde(rename = "ejs_GHz")]
    pub ejs_ghz: f64,
    #[serde(rename = "ejl_GHz")]
    pub ejl_ghz: f64,
    #[serde(default)]
    pub phi_ext_rad: f64,
}

impl Design {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DesignFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }
}

impl TryFrom<DesignFile> for Design {
    type Error = Error;

    fn try_from(file: DesignFile) -> Result<Self> {
        let network = CapacitanceNetwork::try_from(capnet::NetlistFile {
            nodes: file.nodes,
            ground: file.ground,
            pairs: file.pairs,
        })
        .context("netlist")?;
        let qubits = file
            .squids
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let [a, b] = s.qubit;
                let squid = SquidSpec::new(s.ejs_ghz, s.ejl_ghz, s.phi_ext_rad)
                    .context(format!("squids[{i}]"))?;
                Ok(QubitSpec {
                    pads: (a, b),
                    squid,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Design { network, qubits })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitReport {
    /// Difference-mode label, `"b-a"` for pads `(a, b)`.
    pub mode: String,
    pub pads: [String; 2],
    #[serde(flatten)]
    pub params: QubitParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub modes: [String; 2],
    #[serde(flatten)]
    pub params: CouplingParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub qubits: Vec<QubitReport>,
    pub couplings: Vec<CouplingReport>,
}

impl DesignReport {
    /// Copy with every GHz-valued field rounded to 6 decimals.
    pub fn rounded(&self) -> Self {
        let r = |x: f64| round_decimals(x, 6);
        let mut out = self.clone();
        for q in &mut out.qubits {
            let p = &mut q.params;
            p.ec = r(p.ec);
            p.ej = r(p.ej);
            p.omega = r(p.omega);
            p.alpha = r(p.alpha);
            p.alpha_simple = r(p.alpha_simple);
        }
        for c in &mut out.couplings {
            c.params.e12 = r(c.params.e12);
            c.params.j12 = r(c.params.j12);
        }
        out
    }
}

/// Inverse-capacitance block of the qubit difference modes of `design`,
/// in the order the qubits are listed.
pub fn qubit_inverse_block(
    network: &CapacitanceNetwork,
    qubits: &[(&str, &str)],
) -> Result<InverseBlock> {
    let nodes: Vec<&str> = network.nodes().iter().map(String::as_str).collect();
    let passthrough: Vec<&str> = nodes
        .iter()
        .copied()
        .filter(|n| !qubits.iter().any(|(a, b)| a == n || b == n))
        .collect();
    let c = build_matrix_default(network).context("capacitance matrix")?;
    let s = floating_pair_transform(&nodes, qubits, &passthrough).context("mode transform")?;
    let ct = transform_matrix(&c, &s).context("mode transform")?;
    let keep: Vec<String> = qubits
        .iter()
        .map(|(a, b)| difference_mode_label(a, b))
        .collect();
    let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
    reduce_and_invert(&ct, &keep).context("inverse capacitance")
}

/// Full pipeline: netlist → inverse block → per-qubit and per-pair
/// parameters. Couplings are reported for every qubit pair `i < j`.
pub fn derive_design(design: &Design) -> Result<DesignReport> {
    derive_design_with(design, &TransmonOptions::default())
}

pub fn derive_design_with(design: &Design, opts: &TransmonOptions) -> Result<DesignReport> {
    let pads: Vec<(&str, &str)> = design
        .qubits
        .iter()
        .map(|q| (q.pads.0.as_str(), q.pads.1.as_str()))
        .collect();
    let qubits = if pads.is_empty() {
        Vec::new()
    } else {
        let block = qubit_inverse_block(&design.network, &pads).context("capnet")?;
        design
            .qubits
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let ec = CHARGING_FF_GHZ * block.entries[(i, i)];
                let params = squid_transmon(ec, &q.squid, opts)
                    .context(format!("quantize: qubit {}", block.labels[i]))?;
                Ok((
                    block.labels[i].clone(),
                    q,
                    params,
                    block.entries.row(i).clone_owned(),
                ))
            })
            .collect::<Result<Vec<_>>>()?
    };

    let mut couplings = Vec::new();
    for i in 0..qubits.len() {
        for j in (i + 1)..qubits.len() {
            let e12 = CHARGING_FF_GHZ * qubits[i].3[j];
            couplings.push(CouplingReport {
                modes: [qubits[i].0.clone(), qubits[j].0.clone()],
                params: exchange_coupling(e12, &qubits[i].2, &qubits[j].2),
            });
        }
    }
    Ok(DesignReport {
        qubits: qubits
            .into_iter()
            .map(|(mode, q, params, _)| QubitReport {
                mode,
                pads: [q.pads.0.clone(), q.pads.1.clone()],
                params,
            })
            .collect(),
        couplings,
    })
}

/// Two floating transmons whose inner pads couple through an airbridge
/// island to ground.
///
/// Nodes: `1`,`2` (qubit 1 pads), `3` (airbridge), `4`,`5` (qubit 2 pads).
/// Pads 2 and 4 face the bridge through `c_qab1`, `c_qab2`; every pad has
/// `pad_ground` to ground; the pad-pad shunts `C_12` and `C_45` are the
/// `shunt1`, `shunt2` arguments.
pub fn airbridge_pair_network(
    pad_ground: f64,
    c_ab: f64,
    c_qab1: f64,
    c_qab2: f64,
    shunt1: f64,
    shunt2: f64,
) -> Result<CapacitanceNetwork> {
    CapacitanceNetwork::new(["1", "2", "3", "4", "5"])?
        .with_ground("1", pad_ground)?
        .with_ground("2", pad_ground)?
        .with_ground("3", c_ab)?
        .with_ground("4", pad_ground)?
        .with_ground("5", pad_ground)?
        .with_pair("1", "2", shunt1)?
        .with_pair("2", "3", c_qab1)?
        .with_pair("4", "3", c_qab2)?
        .with_pair("5", "4", shunt2)
}

/// Pads of the two qubits of [`airbridge_pair_network`], oriented so the
/// difference modes are `Φ_2 − Φ_1` and `Φ_4 − Φ_5`.
pub const AIRBRIDGE_PAIR_PADS: [(&str, &str); 2] = [("1", "2"), ("5", "4")];

/// Adjusts the pad-to-pad capacitance of each listed qubit until the
/// qubit's equivalent capacitance `1/A_ii` equals its target (fF).
///
/// Each shunt is found by bisection with the others held fixed; sweeps
/// repeat until no shunt moves by more than `1e-9` fF.
pub fn calibrate_shunts(
    network: &CapacitanceNetwork,
    qubits: &[(&str, &str)],
    targets_ff: &[f64],
) -> Result<CapacitanceNetwork> {
    if qubits.len() != targets_ff.len() {
        return Err(Error::DimensionMismatch {
            expected: qubits.len(),
            found: targets_ff.len(),
        });
    }
    let mut net = network.clone();
    let c_sigma = |net: &CapacitanceNetwork, i: usize| -> Result<f64> {
        Ok(1.0 / qubit_inverse_block(net, qubits)?.entries[(i, i)])
    };
    for _sweep in 0..100 {
        let mut moved: f64 = 0.0;
        for (i, &(a, b)) in qubits.iter().enumerate() {
            let target = targets_ff[i];
            let before = net.pair(a, b);
            let mut lo = 0.0;
            let mut hi = target;
            net.set_pair(a, b, lo)?;
            if c_sigma(&net, i)? > target {
                return Err(Error::InvalidArgument(format!(
                    "qubit ({a}, {b}) exceeds C_sigma = {target} fF without any shunt"
                )));
            }
            while hi - lo > 1e-11 {
                let mid = 0.5 * (lo + hi);
                net.set_pair(a, b, mid)?;
                if c_sigma(&net, i)? < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let value = 0.5 * (lo + hi);
            net.set_pair(a, b, value)?;
            moved = moved.max((value - before).abs());
        }
        if moved < 1e-9 {
            return Ok(net);
        }
    }
    Err(Error::NotConverged { iterations: 100 })
}
