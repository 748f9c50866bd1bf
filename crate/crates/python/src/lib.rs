// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Python module `om_entangle`: parameter sets, drive schedules, stability
//! metric, time- and frequency-domain entanglement, and the random searches.
//! Structured results come back as dicts of lists; search winners as their
//! JSON record.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use om_entangle::covariance::{log_negativity, CovarianceMatrix, HermiticityPolicy, SecondMoments, TimeSeriesSetup};
use om_entangle::model::{self, DriveValues};
use om_entangle::params::{self as core_params, PerMode};
use om_entangle::propagator::{TimeGrid, TrotterConfig};
use om_entangle::search::{self, Execution, PulseSearchSetup, SearchConfig, SpectralSearchSetup};
use om_entangle::spectral::{self, FrequencyGrid};
use om_entangle::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numeric(_) | Error::IndexOutOfRange { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::NoFeasibleCandidate { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn policy(strict: bool) -> HermiticityPolicy {
    if strict {
        HermiticityPolicy::Strict
    } else {
        HermiticityPolicy::Project
    }
}

/// Damping strengths and fixed couplings, rad/s.
#[pyclass(name = "SystemParams", module = "om_entangle", from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    inner: core_params::SystemParams,
}

#[pymethods]
impl PySystemParams {
    /// Reference parameter set for an unenhanced coupling `g0` (default:
    /// the built-in value).
    #[staticmethod]
    #[pyo3(signature = (g0=None))]
    fn reference(g0: Option<f64>) -> PyResult<Self> {
        let inner = core_params::derive_params_with_g0(g0.unwrap_or(core_params::G0)).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Damping used by the stability scan.
    #[staticmethod]
    fn stability_scan() -> Self {
        Self { inner: core_params::stability_scan_params() }
    }

    /// Damping used by the pulse and constant-drive searches.
    #[staticmethod]
    fn pulse_search() -> Self {
        Self { inner: core_params::pulse_search_params() }
    }

    #[getter]
    fn g0(&self) -> f64 {
        self.inner.g0
    }

    #[getter]
    fn g_f(&self) -> f64 {
        self.inner.g_f
    }

    #[getter]
    fn conv_c(&self) -> f64 {
        self.inner.conv_c
    }

    /// Damping per mode as a dict keyed `o1, m1, mw1, f, o2, m2, mw2`.
    #[getter]
    fn kappa<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let k = &self.inner.kappa;
        let d = PyDict::new(py);
        for (name, v) in [("o1", k.o1), ("m1", k.m1), ("mw1", k.mw1), ("f", k.f), ("o2", k.o2), ("m2", k.m2), ("mw2", k.mw2)] {
            d.set_item(name, v)?;
        }
        Ok(d)
    }

    /// Copy with every damping strength zero.
    fn undamped(&self) -> Self {
        Self { inner: self.inner.undamped() }
    }

    fn __repr__(&self) -> String {
        format!("SystemParams(g0={:e}, g_f={:e}, conv_c={:e})", self.inner.g0, self.inner.g_f, self.inner.conv_c)
    }
}

/// Initial and bath occupations.
#[pyclass(name = "ThermalSpec", module = "om_entangle", from_py_object)]
#[derive(Clone)]
struct PyThermalSpec {
    inner: core_params::ThermalSpec,
}

#[pymethods]
impl PyThermalSpec {
    #[new]
    #[pyo3(signature = (n_th=0.0, q_th=0.0, n_bar=0.0))]
    fn new(n_th: f64, q_th: f64, n_bar: f64) -> PyResult<Self> {
        let inner = core_params::ThermalSpec { n_bar: PerMode::splat(n_bar), n_th, q_th };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_th(&self) -> f64 {
        self.inner.n_th
    }

    #[getter]
    fn q_th(&self) -> f64 {
        self.inner.q_th
    }
}

/// The four laser couplings as functions of time.
#[pyclass(name = "DriveSchedule", module = "om_entangle", from_py_object)]
#[derive(Clone)]
struct PyDriveSchedule {
    inner: model::DriveSchedule,
}

#[pymethods]
impl PyDriveSchedule {
    #[staticmethod]
    fn constant(g_mw1: f64, g_mw2: f64, g_o1: f64, g_o2: f64) -> PyResult<Self> {
        let inner = model::DriveSchedule::constant(DriveValues { g_mw1, g_mw2, g_o1, g_o2 });
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// The constant drives of the reference filtered-output optimum.
    #[staticmethod]
    fn reference() -> Self {
        Self { inner: model::DriveSchedule::constant(spectral::REFERENCE_DRIVES) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: model::DriveSchedule =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// `(g_mw1, g_mw2, g_o1, g_o2)` at time `t`.
    fn values(&self, t: f64) -> (f64, f64, f64, f64) {
        let v = self.inner.values(t);
        (v.g_mw1, v.g_mw2, v.g_o1, v.g_o2)
    }

    fn is_constant(&self) -> bool {
        self.inner.as_constant().is_some()
    }
}

/// Largest real part of the eigenvalues of `-iM` for constant drives.
#[pyfunction]
fn rh_metric(params: &PySystemParams, g_mw1: f64, g_mw2: f64, g_o1: f64, g_o2: f64) -> PyResult<f64> {
    let m = model::assemble_from_values(&params.inner, &DriveValues { g_mw1, g_mw2, g_o1, g_o2 });
    model::rh_metric(&m).map_err(to_py)
}

/// `S_RH` over an `n × n` log-spaced grid of optical couplings on
/// `[lo, hi]²` with microwave drives set from `r`.
#[pyfunction]
fn stability_scan<'py>(py: Python<'py>, params: &PySystemParams, r: f64, lo: f64, hi: f64, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let grid = model::ScanGrid::log_spaced(lo, hi, n);
    let p = params.inner;
    let scan = py.detach(|| model::stability_scan(&p, r, &grid)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("g_o1", scan.points.iter().map(|q| q.g_o1).collect::<Vec<_>>())?;
    d.set_item("g_o2", scan.points.iter().map(|q| q.g_o2).collect::<Vec<_>>())?;
    d.set_item("s_rh", scan.points.iter().map(|q| q.s_rh).collect::<Vec<_>>())?;
    d.set_item("best", (scan.best.g_o1, scan.best.g_o2, scan.best.s_rh))?;
    d.set_item("g_mw1", scan.g_mw1)?;
    d.set_item("g_mw2", scan.g_mw2)?;
    Ok(d)
}

/// Logarithmic negativity of the two microwave modes from their moments.
#[pyfunction]
#[pyo3(signature = (n1, n2, m12, m12dag=None))]
fn logneg_from_moments(n1: f64, n2: f64, m12: Complex64, m12dag: Option<Complex64>) -> PyResult<f64> {
    let m = SecondMoments { n1, n2, m12, m12dag: m12dag.unwrap_or(m12.conj()) };
    let m = HermiticityPolicy::Project.apply(&m).map_err(to_py)?;
    log_negativity(&CovarianceMatrix::from_moments(&m)).map_err(to_py)
}

/// Normalized entanglement in `[0, 1]` from the logarithmic negativity.
#[pyfunction]
fn ent_from_logneg(e_n: f64) -> PyResult<f64> {
    model::ent_from_logneg(e_n).map_err(to_py)
}

/// Squeezing parameter giving a target normalized entanglement.
#[pyfunction]
fn r_from_ent(ent: f64) -> PyResult<f64> {
    model::r_from_ent(ent).map_err(to_py)
}

/// `E_N`, ent, `S_RH` and drives at every output time.
#[pyfunction]
#[pyo3(signature = (params, drives, thermal, t_end, n_points=1000, n_trotter=50, n_trap=5, strict=false))]
#[allow(clippy::too_many_arguments)]
fn time_series<'py>(
    py: Python<'py>,
    params: &PySystemParams,
    drives: &PyDriveSchedule,
    thermal: &PyThermalSpec,
    t_end: f64,
    n_points: usize,
    n_trotter: usize,
    n_trap: usize,
    strict: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = TimeGrid::new(t_end, n_points).map_err(to_py)?;
    let cfg = TrotterConfig { n_trotter, n_trap };
    let (p, d, th) = (params.inner, drives.inner, thermal.inner);
    let ev = py
        .detach(|| {
            let setup = TimeSeriesSetup { params: &p, drives: &d, thermal: &th, grid: &grid, cfg: &cfg, policy: policy(strict) };
            search::evaluate_pulse_schedule(&setup)
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("t", ev.series.iter().map(|q| q.point.at()).collect::<Vec<_>>())?;
    out.set_item("e_n", ev.series.iter().map(|q| q.point.e_n()).collect::<Vec<_>>())?;
    out.set_item("ent", ev.series.iter().map(|q| q.point.ent()).collect::<Vec<_>>())?;
    out.set_item("s_rh", ev.series.iter().map(|q| q.point.s_rh()).collect::<Vec<_>>())?;
    for (i, name) in ["g_mw1", "g_mw2", "g_o1", "g_o2"].into_iter().enumerate() {
        out.set_item(name, ev.series.iter().map(|q| q.drives.to_array()[i]).collect::<Vec<_>>())?;
    }
    out.set_item("peak_index", ev.peak_index)?;
    Ok(out)
}

/// Filtered entanglement spectrum on `ω = k Δω`, `k = -n..=n`, for constant
/// drives.
#[pyfunction]
#[pyo3(signature = (params, drives, thermal, delta_omega=1e6, n=1000, strict=false))]
fn spectrum<'py>(
    py: Python<'py>,
    params: &PySystemParams,
    drives: &PyDriveSchedule,
    thermal: &PyThermalSpec,
    delta_omega: f64,
    n: i64,
    strict: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let v = drives
        .inner
        .as_constant()
        .ok_or_else(|| PyValueError::new_err("spectrum needs constant drives"))?;
    let fg = FrequencyGrid::symmetric(delta_omega, n);
    let (p, th) = (params.inner, thermal.inner);
    let sp = py.detach(|| spectral::entanglement_spectrum(&p, &v, &th, &fg, policy(strict))).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("omega", sp.points.iter().map(|q| q.at()).collect::<Vec<_>>())?;
    out.set_item("e_n", sp.points.iter().map(|q| q.e_n()).collect::<Vec<_>>())?;
    out.set_item("ent", sp.points.iter().map(|q| q.ent()).collect::<Vec<_>>())?;
    out.set_item("s_rh", sp.s_rh)?;
    out.set_item("peak", (sp.peak.at(), sp.peak.e_n(), sp.peak.ent()))?;
    out.set_item("refined_peak", (sp.refined_peak.at(), sp.refined_peak.e_n(), sp.refined_peak.ent()))?;
    Ok(out)
}

/// Constant-drive random search over `[0, 110 g0]⁴`; returns the winner
/// record as JSON.
#[pyfunction]
#[pyo3(signature = (params, thermal, trials, seed=search::DEFAULT_SEED, delta_omega=1e6, n=1000))]
fn search_spectral(
    py: Python<'_>,
    params: &PySystemParams,
    thermal: &PyThermalSpec,
    trials: u64,
    seed: u64,
    delta_omega: f64,
    n: i64,
) -> PyResult<String> {
    let (p, th) = (params.inner, thermal.inner);
    let space = search::SpectralSearchSpace::default_for(p.g0);
    let fg = FrequencyGrid::symmetric(delta_omega, n);
    let (rec, _) = py
        .detach(|| {
            let setup = SpectralSearchSetup { space: &space, params: &p, thermal: &th, frequencies: &fg, policy: HermiticityPolicy::Project };
            search::spectral_search(&setup, &SearchConfig::new(seed, trials), Execution::Parallel)
        })
        .map_err(to_py)?;
    rec.to_json().map_err(to_py)
}

/// Trapezoid-pulse random search over the default space; returns the winner
/// record as JSON.
#[pyfunction]
#[pyo3(signature = (params, thermal, trials, seed=search::DEFAULT_SEED, n_points=1000, n_trotter=50, n_trap=5))]
#[allow(clippy::too_many_arguments)]
fn search_pulses(
    py: Python<'_>,
    params: &PySystemParams,
    thermal: &PyThermalSpec,
    trials: u64,
    seed: u64,
    n_points: usize,
    n_trotter: usize,
    n_trap: usize,
) -> PyResult<String> {
    let (p, th) = (params.inner, thermal.inner);
    let space = search::PulseSearchSpace::default_for(p.g0);
    let grid = TimeGrid::new(space.horizon, n_points).map_err(to_py)?;
    let cfg = TrotterConfig { n_trotter, n_trap };
    let (rec, _) = py
        .detach(|| {
            let setup = PulseSearchSetup { space: &space, params: &p, thermal: &th, grid: &grid, cfg: &cfg, policy: HermiticityPolicy::Project };
            search::pulse_search(&setup, &SearchConfig::new(seed, trials), Execution::Parallel)
        })
        .map_err(to_py)?;
    rec.to_json().map_err(to_py)
}

#[pymodule]
#[pyo3(name = "om_entangle")]
fn om_entangle_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyThermalSpec>()?;
    m.add_class::<PyDriveSchedule>()?;
    m.add_function(wrap_pyfunction!(rh_metric, m)?)?;
    m.add_function(wrap_pyfunction!(stability_scan, m)?)?;
    m.add_function(wrap_pyfunction!(logneg_from_moments, m)?)?;
    m.add_function(wrap_pyfunction!(ent_from_logneg, m)?)?;
    m.add_function(wrap_pyfunction!(r_from_ent, m)?)?;
    m.add_function(wrap_pyfunction!(time_series, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(search_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(search_pulses, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
