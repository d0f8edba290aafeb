//! Python bindings for the `hmf-core` laboratory.

use hmf_core::actionangle::{Chart, Observable, PhasePoint, SpectralTable};
use hmf_core::config::RunConfig;
use hmf_core::damping::{linear_damping_run, presets};
use hmf_core::elliptic::{bessel_i, complete_e, complete_k, JacobiSolver, Modulus};
use hmf_core::equilibria::{solve_magnetization, stability_indicator, Profile, StationaryState};
use hmf_core::experiments::{run_experiment as run, spectral_table, stationary_state, Experiment};
use hmf_core::volterra::{kernel_series, penrose_scan, PenroseSummary, TimeGrid};
use hmf_core::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;
use std::path::PathBuf;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Misuse(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Converts a serializable value into plain Python objects through JSON.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_chart(label: &str) -> PyResult<Chart> {
    Chart::ALL
        .into_iter()
        .find(|c| c.label() == label)
        .ok_or_else(|| PyValueError::new_err(format!("unknown chart {label:?}; expected eye, outer_upper or outer_lower")))
}

fn load_config(overrides: Vec<String>, config: Option<PathBuf>) -> PyResult<RunConfig> {
    RunConfig::load(config.as_deref(), &overrides).map_err(py_err)
}

/// Jacobi elliptic functions `(sn, cn, dn)` at argument `u` and modulus `k`.
#[pyfunction]
fn jacobi(u: f64, k: f64) -> PyResult<(f64, f64, f64)> {
    let solver = Modulus::new(k).and_then(JacobiSolver::new).map_err(py_err)?;
    let e = solver.eval(u).map_err(py_err)?;
    Ok((e.sn, e.cn, e.dn))
}

/// Complete elliptic integrals `(K(k), E(k))`.
#[pyfunction]
fn complete_integrals(k: f64) -> PyResult<(f64, f64)> {
    let m = Modulus::new(k).map_err(py_err)?;
    Ok((complete_k(m).map_err(py_err)?, complete_e(m).map_err(py_err)?))
}

/// Modified Bessel function of the first kind `I_n(z)`.
#[pyfunction]
fn bessel(n: u32, z: f64) -> PyResult<f64> {
    bessel_i(n, z).map_err(py_err)
}

/// A self-consistent stationary state.
#[pyclass(name = "State", frozen)]
struct PyState(StationaryState);

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (alpha = 0.3, beta = 4.0, profile = "gaussian", zeta = None))]
    fn new(alpha: f64, beta: f64, profile: &str, zeta: Option<f64>) -> PyResult<Self> {
        let profile = match profile {
            "gaussian" => Profile::gaussian(alpha, beta),
            "fermi" => Profile::fermi(alpha, beta),
            other => return Err(PyValueError::new_err(format!("unknown profile {other:?}"))),
        }
        .map_err(py_err)?;
        solve_magnetization(&profile, zeta).map(Self).map_err(py_err)
    }

    #[getter]
    fn m0(&self) -> f64 {
        self.0.m0
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn profile(&self) -> String {
        self.0.profile.label()
    }

    fn energy(&self, x: f64, v: f64) -> f64 {
        self.0.energy(x, v)
    }

    fn density(&self, x: f64, v: f64) -> f64 {
        self.0.density(x, v)
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint()
    }

    fn __repr__(&self) -> String {
        format!("State({}, M0={})", self.0.profile.label(), self.0.m0)
    }
}

/// Pendulum `v^2/2 - M0 cos x` and its action-angle charts.
#[pyclass(name = "Pendulum", frozen)]
struct PyPendulum(hmf_core::actionangle::Pendulum);

#[pymethods]
impl PyPendulum {
    #[new]
    fn new(m0: f64) -> PyResult<Self> {
        hmf_core::actionangle::Pendulum::new(m0).map(Self).map_err(py_err)
    }

    fn frequency(&self, chart: &str, h: f64) -> PyResult<f64> {
        self.0.frequency(parse_chart(chart)?, h).map_err(py_err)
    }

    fn action(&self, chart: &str, h: f64) -> PyResult<f64> {
        self.0.action(parse_chart(chart)?, h).map_err(py_err)
    }

    /// Returns `(chart, h, theta, action)`.
    fn to_action_angle(&self, x: f64, v: f64) -> PyResult<(String, f64, f64, f64)> {
        let c = self.0.to_action_angle(PhasePoint::new(x, v)).map_err(py_err)?;
        Ok((c.chart.label().to_string(), c.h, c.theta, c.action))
    }

    fn to_cartesian(&self, chart: &str, h: f64, theta: f64) -> PyResult<(f64, f64)> {
        let c = self.0.coordinates(parse_chart(chart)?, h, theta).map_err(py_err)?;
        let p = self.0.to_cartesian(&c).map_err(py_err)?;
        Ok((p.x, p.v))
    }
}

/// A stationary state together with its spectral table, built from a run
/// configuration. The table carries the preset observables `r0`, `left`,
/// `right`, `flat2` and `cos_x`.
#[pyclass(name = "Lab", frozen)]
struct PyLab {
    config: RunConfig,
    state: StationaryState,
    table: SpectralTable,
}

fn observables() -> Vec<Observable> {
    let (left, right) = presets::bump_pair();
    vec![
        presets::damping_bump(),
        left,
        right,
        presets::flat_quadratic(),
        Observable::cos_x(),
    ]
}

impl PyLab {
    fn penrose_summary(&self) -> PyResult<PenroseSummary> {
        penrose_scan(&self.state, &self.table, &self.config.penrose)
            .map(|s| s.summary())
            .map_err(py_err)
    }
}

#[pymethods]
impl PyLab {
    #[new]
    #[pyo3(signature = (overrides = Vec::new(), config = None))]
    fn new(py: Python<'_>, overrides: Vec<String>, config: Option<PathBuf>) -> PyResult<Self> {
        let config = load_config(overrides, config)?;
        config.validate().map_err(py_err)?;
        py.detach(|| {
            let state = stationary_state(&config)?;
            let table = spectral_table(&config, &state, &observables())?;
            Ok(Self { config, state, table })
        })
        .map_err(py_err)
    }

    #[getter]
    fn state(&self) -> PyState {
        PyState(self.state)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.table.node_count()
    }

    #[getter]
    fn max_parseval_defect(&self) -> f64 {
        self.table.max_parseval_defect()
    }

    fn stability_indicator(&self) -> PyResult<f64> {
        stability_indicator(&self.state, &self.table).map_err(py_err)
    }

    /// Kernel series on the configured time grid, as a dict of lists.
    fn kernels<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let series = py
            .detach(|| {
                let grid = TimeGrid::new(self.config.time.dt, self.config.time.t_final)?;
                kernel_series(&self.state, &self.table, &grid)
            })
            .map_err(py_err)?;
        let dict = PyDict::new(py);
        dict.set_item("t", series.grid.times().collect::<Vec<_>>())?;
        dict.set_item("K_C", &series.k_c)?;
        dict.set_item("K_S", &series.k_s)?;
        dict.set_item("Q_C", &series.q_c)?;
        dict.set_item("Q_S", &series.q_s)?;
        Ok(dict)
    }

    /// Penrose scan summary.
    fn penrose<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let summary = py.detach(|| self.penrose_summary())?;
        to_py(py, &summary)
    }

    /// Linear damping run from the `r0` preset: the summary plus the series
    /// under `t`, `C`, `S`.
    fn damping<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let damping = self.config.damping_config();
        let report = py.detach(|| {
            let penrose = self.penrose_summary()?;
            linear_damping_run(&self.state, &self.table, &presets::damping_bump(), &penrose, &damping)
                .map_err(py_err)
        })?;
        let out = to_py(py, &report.summary(&damping))?;
        out.set_item("t", report.grid.times().collect::<Vec<_>>())?;
        out.set_item("C", &report.c)?;
        out.set_item("S", &report.s)?;
        Ok(out)
    }
}

/// Runs a named experiment, writing its files under `out`, and returns the
/// JSON report as a dict.
#[pyfunction]
#[pyo3(signature = (name, out, overrides = Vec::new(), config = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    name: &str,
    out: PathBuf,
    overrides: Vec<String>,
    config: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let experiment: Experiment = name.parse().map_err(py_err)?;
    let config = load_config(overrides, config)?;
    let outcome = py.detach(|| run(experiment, &config, &out)).map_err(py_err)?;
    to_py(py, &outcome.report)
}

#[pymodule]
fn hmf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyPendulum>()?;
    m.add_class::<PyLab>()?;
    m.add_function(wrap_pyfunction!(jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(complete_integrals, m)?)?;
    m.add_function(wrap_pyfunction!(bessel, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
