//! Python bindings: `import airbridge`.
//!
//! Scalar results come back as floats, small records as frozen classes and
//! whole reports as plain dicts (the same shape the CLI prints).

use airbridge_core::fitkit::{self, NotchModel as CoreNotch};
use airbridge_core::layout::{self, RuleConfig};
use airbridge_core::quantize::{self, Design, SquidSpec};
use airbridge_core::scaffold::{self, Profile as CoreProfile};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: airbridge_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON into Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen, get_all, module = "airbridge")]
struct QubitParams {
    ec: f64,
    ej: f64,
    xi: f64,
    omega: f64,
    alpha: f64,
    alpha_simple: f64,
    n_zpf: f64,
    phi_zpf: f64,
    phi0: f64,
}

impl From<quantize::QubitParams> for QubitParams {
    fn from(p: quantize::QubitParams) -> Self {
        Self {
            ec: p.ec,
            ej: p.ej,
            xi: p.xi,
            omega: p.omega,
            alpha: p.alpha,
            alpha_simple: p.alpha_simple,
            n_zpf: p.n_zpf,
            phi_zpf: p.phi_zpf,
            phi0: p.phi0,
        }
    }
}

#[pymethods]
impl QubitParams {
    fn __repr__(&self) -> String {
        format!(
            "QubitParams(ec={}, ej={}, omega={}, alpha={})",
            self.ec, self.ej, self.omega, self.alpha
        )
    }
}

/// Perturbative transmon parameters for `ec`, `ej` in GHz.
#[pyfunction]
fn transmon_params(ec: f64, ej: f64) -> PyResult<QubitParams> {
    quantize::transmon_params(ec, ej)
        .map(Into::into)
        .map_err(err)
}

/// Charge-basis levels in GHz, ground at 0.
#[pyfunction]
#[pyo3(signature = (ec, ej, n_max = quantize::DEFAULT_N_MAX))]
fn charge_basis_levels(ec: f64, ej: f64, n_max: usize) -> PyResult<Vec<f64>> {
    quantize::charge_basis_spectrum(ec, ej, n_max)
        .map(|s| s.levels)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (ejs, ejl, phi_ext = 0.0))]
fn squid_effective_ej(ejs: f64, ejl: f64, phi_ext: f64) -> PyResult<f64> {
    Ok(quantize::squid_effective_ej(
        &SquidSpec::new(ejs, ejl, phi_ext).map_err(err)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (ejs, ejl, phi_ext = 0.0))]
fn squid_phase_offset(ejs: f64, ejl: f64, phi_ext: f64) -> PyResult<f64> {
    quantize::squid_phase_offset(&SquidSpec::new(ejs, ejl, phi_ext).map_err(err)?).map_err(err)
}

/// Design JSON text in, report dict out.
#[pyfunction]
fn quantize_design<'py>(py: Python<'py>, design_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let d = Design::from_json(design_json).map_err(err)?;
    let report = quantize::derive_design(&d).map_err(err)?;
    to_py(py, &report.rounded())
}

#[pyclass(frozen, module = "airbridge")]
struct Profile {
    inner: CoreProfile,
}

#[pymethods]
impl Profile {
    #[new]
    fn new(x0: f64, dx: f64, heights: Vec<f64>) -> PyResult<Self> {
        CoreProfile::new(x0, dx, heights)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn x0(&self) -> f64 {
        self.inner.x0
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx
    }

    #[getter]
    fn heights(&self) -> Vec<f64> {
        self.inner.heights.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.heights.len()
    }

    /// Linearly interpolated height.
    fn at(&self, x: f64) -> f64 {
        self.inner.at(x)
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(x0={}, dx={}, n={})",
            self.inner.x0,
            self.inner.dx,
            self.inner.heights.len()
        )
    }
}

#[pyfunction]
fn simulate_scaffold(edge: &Profile, length: f64) -> PyResult<Profile> {
    scaffold::simulate_scaffold(&edge.inner, length)
        .map(|inner| Profile { inner })
        .map_err(err)
}

#[pyfunction]
fn grayscale_profile(height: f64, length: f64, n: usize) -> PyResult<Profile> {
    scaffold::grayscale_profile(height, length, n)
        .map(|inner| Profile { inner })
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (profile, slope_tol = scaffold::DEFAULT_SLOPE_TOL, min_span = scaffold::DEFAULT_MIN_SPAN))]
fn detect_plateau<'py>(
    py: Python<'py>,
    profile: &Profile,
    slope_tol: f64,
    min_span: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = scaffold::detect_plateau(&profile.inner, slope_tol, min_span).map_err(err)?;
    to_py(py, &r)
}

/// Returns `(length, monotone, always_plateau)`.
#[pyfunction]
#[pyo3(signature = (edge, lo = 20.0, hi = 200.0, slope_tol = scaffold::DEFAULT_SLOPE_TOL, min_span = scaffold::DEFAULT_MIN_SPAN))]
fn max_stable_length(
    edge: &Profile,
    lo: f64,
    hi: f64,
    slope_tol: f64,
    min_span: f64,
) -> PyResult<(f64, bool, bool)> {
    let m = scaffold::max_stable_length(&edge.inner, slope_tol, min_span, (lo, hi)).map_err(err)?;
    Ok((m.length, m.monotone, m.always_plateau))
}

#[pyfunction]
#[pyo3(signature = (x, y, weights = None))]
fn linear_fit<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    y: Vec<f64>,
    weights: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    if x.len() != y.len() {
        return Err(PyValueError::new_err("x and y differ in length"));
    }
    let pts: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
    let fit = fitkit::linear_fit(&pts, weights.as_deref()).map_err(err)?;
    to_py(py, &fit)
}

#[pyclass(frozen, get_all, module = "airbridge")]
struct NotchModel {
    f0: f64,
    q_internal: f64,
    q_coupling: f64,
    phi: f64,
}

impl NotchModel {
    fn core(&self) -> CoreNotch {
        CoreNotch::from_quality(self.f0, self.q_internal, self.q_coupling, self.phi)
    }
}

#[pymethods]
impl NotchModel {
    #[new]
    #[pyo3(signature = (f0, q_internal, q_coupling, phi = 0.0))]
    fn new(f0: f64, q_internal: f64, q_coupling: f64, phi: f64) -> Self {
        Self {
            f0,
            q_internal,
            q_coupling,
            phi,
        }
    }

    #[getter]
    fn q_loaded(&self) -> f64 {
        self.core().q_loaded
    }

    /// Transmission at frequency `f` (GHz).
    fn s21(&self, f: f64) -> Complex64 {
        fitkit::notch_s21(f, &self.core())
    }

    /// `n` evenly spaced points covering `linewidths` around f0.
    #[pyo3(signature = (linewidths = 10.0, n = 201))]
    fn sweep(&self, linewidths: f64, n: usize) -> (Vec<f64>, Vec<Complex64>) {
        fitkit::notch::synthetic_sweep(&self.core(), linewidths, n)
            .into_iter()
            .unzip()
    }

    /// Mean photon number at a feedline power in dBm.
    fn photon_number(&self, power_dbm: f64) -> f64 {
        fitkit::photon_number(power_dbm, &self.core())
    }

    fn __repr__(&self) -> String {
        format!(
            "NotchModel(f0={}, q_internal={}, q_coupling={}, phi={})",
            self.f0, self.q_internal, self.q_coupling, self.phi
        )
    }
}

#[pyfunction]
fn fit_notch<'py>(
    py: Python<'py>,
    f: Vec<f64>,
    s21: Vec<Complex64>,
) -> PyResult<Bound<'py, PyAny>> {
    if f.len() != s21.len() {
        return Err(PyValueError::new_err("f and s21 differ in length"));
    }
    let sweep: Vec<(f64, Complex64)> = f.into_iter().zip(s21).collect();
    to_py(py, &fitkit::fit_notch(&sweep).map_err(err)?)
}

#[pyfunction]
fn tls_loss(n_photon: f64, f_delta0: f64, n_c: f64, beta: f64, q_hp: f64) -> PyResult<f64> {
    let t = fitkit::TlsParams::new(f_delta0, n_c, beta, q_hp).map_err(err)?;
    Ok(fitkit::tls_loss(n_photon, &t))
}

#[pyfunction]
fn fit_tls<'py>(
    py: Python<'py>,
    n_photon: Vec<f64>,
    inv_qi: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    if n_photon.len() != inv_qi.len() {
        return Err(PyValueError::new_err(
            "n_photon and inv_qi differ in length",
        ));
    }
    let pts: Vec<(f64, f64)> = n_photon.into_iter().zip(inv_qi).collect();
    to_py(py, &fitkit::fit_tls(&pts).map_err(err)?)
}

/// Layout JSON (and optional rule JSON) in, list of placement dicts out.
#[pyfunction]
#[pyo3(signature = (layout_json, rule_json = None))]
fn place<'py>(
    py: Python<'py>,
    layout_json: &str,
    rule_json: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let paths = layout::parse_layout(layout_json).map_err(err)?;
    let rules = match rule_json {
        Some(r) => RuleConfig::from_json(r).map_err(err)?,
        None => RuleConfig::default(),
    };
    to_py(py, &layout::place_layout(&paths, &rules).map_err(err)?)
}

/// Violations for a placement list given as JSON text.
#[pyfunction]
#[pyo3(signature = (layout_json, placements_json, clearance = 0.0))]
fn check<'py>(
    py: Python<'py>,
    layout_json: &str,
    placements_json: &str,
    clearance: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let paths = layout::parse_layout(layout_json).map_err(err)?;
    let list: Vec<layout::BridgePlacement> =
        serde_json::from_str(placements_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(
        py,
        &layout::check_placements(&paths, &list, clearance).map_err(err)?,
    )
}

#[pymodule]
fn airbridge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<QubitParams>()?;
    m.add_class::<Profile>()?;
    m.add_class::<NotchModel>()?;
    m.add_function(wrap_pyfunction!(transmon_params, m)?)?;
    m.add_function(wrap_pyfunction!(charge_basis_levels, m)?)?;
    m.add_function(wrap_pyfunction!(squid_effective_ej, m)?)?;
    m.add_function(wrap_pyfunction!(squid_phase_offset, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_design, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_scaffold, m)?)?;
    m.add_function(wrap_pyfunction!(grayscale_profile, m)?)?;
    m.add_function(wrap_pyfunction!(detect_plateau, m)?)?;
    m.add_function(wrap_pyfunction!(max_stable_length, m)?)?;
    m.add_function(wrap_pyfunction!(linear_fit, m)?)?;
    m.add_function(wrap_pyfunction!(fit_notch, m)?)?;
    m.add_function(wrap_pyfunction!(tls_loss, m)?)?;
    m.add_function(wrap_pyfunction!(fit_tls, m)?)?;
    m.add_function(wrap_pyfunction!(place, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
