//! Python bindings. Trajectories come back as dicts of column lists keyed
//! like the CSV header.

use hybridyn::config::{named_spin_state, parse_config, parse_oscillator_form};
use hybridyn::dynamics::{
    self, IntegratorConfig, Method, OscillatorBackground, ScState, Trajectory,
};
use hybridyn::model;
use hybridyn::observables::{self, Regime};
use hybridyn::quantum::{BasisLayout, Complex64, QuantumState};
use hybridyn::scenarios::{self, ComparisonReport, PRESET_NAMES};
use hybridyn::statics;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: hybridyn::Error) -> PyErr {
    match e {
        hybridyn::Error::Validation { .. }
        | hybridyn::Error::Parse { .. }
        | hybridyn::Error::UnknownPreset(_)
        | hybridyn::Error::Unrepresentable { .. }
        | hybridyn::Error::BadLayout(_)
        | hybridyn::Error::MassFrequencyNotUnit(_)
        | hybridyn::Error::NoStaticCircle { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

#[pyclass(name = "ModelParams", from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    #[pyo3(get, set)]
    m: f64,
    #[pyo3(get, set)]
    omega: f64,
    #[pyo3(get, set)]
    omega_s: f64,
    #[pyo3(get, set)]
    g1: f64,
    #[pyo3(get, set)]
    g2: f64,
    #[pyo3(get, set, name = "lambda_")]
    lambda: f64,
    #[pyo3(get, set)]
    levels: usize,
    #[pyo3(get, set)]
    oscillator_form: String,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (omega_s=0.0, g1=0.0, g2=0.0, lambda_=0.0, m=1.0, omega=1.0, levels=4, oscillator_form="number"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        omega_s: f64,
        g1: f64,
        g2: f64,
        lambda_: f64,
        m: f64,
        omega: f64,
        levels: usize,
        oscillator_form: &str,
    ) -> PyResult<Self> {
        let p = Self {
            m,
            omega,
            omega_s,
            g1,
            g2,
            lambda: lambda_,
            levels,
            oscillator_form: oscillator_form.to_string(),
        };
        p.to_core()?;
        Ok(p)
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(omega_s={}, g1={}, g2={}, lambda_={}, m={}, omega={}, levels={}, oscillator_form={:?})",
            self.omega_s, self.g1, self.g2, self.lambda, self.m, self.omega, self.levels, self.oscillator_form
        )
    }
}

impl PyModelParams {
    fn to_core(&self) -> PyResult<model::ModelParams> {
        let p = model::ModelParams {
            m: self.m,
            omega: self.omega,
            omega_s: self.omega_s,
            g1: self.g1,
            g2: self.g2,
            lambda: self.lambda,
            levels: self.levels,
            oscillator_form: parse_oscillator_form(&self.oscillator_form).map_err(py_err)?,
        };
        p.validate().map_err(py_err)?;
        Ok(p)
    }
}

fn integrator(
    t_final: f64,
    dt: f64,
    sample_every: usize,
    method: &str,
) -> PyResult<IntegratorConfig> {
    let cfg = IntegratorConfig {
        dt,
        t_final,
        sample_every,
        method: method.parse::<Method>().map_err(py_err)?,
        ..IntegratorConfig::default()
    };
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

fn full_state(amps: Vec<Complex64>) -> PyResult<QuantumState> {
    if !amps.len().is_multiple_of(4) || amps.len() < 8 {
        return Err(PyValueError::new_err(
            "full state length must be 4*levels with levels >= 2",
        ));
    }
    let layout = BasisLayout::OscillatorSpins {
        levels: amps.len() / 4,
    };
    QuantumState::new(amps, layout).map_err(py_err)
}

fn spin_state(amps: Vec<Complex64>) -> PyResult<QuantumState> {
    QuantumState::new(amps, BasisLayout::Spins).map_err(py_err)
}

fn any_state(amps: Vec<Complex64>) -> PyResult<QuantumState> {
    if amps.len() == 4 {
        spin_state(amps)
    } else {
        full_state(amps)
    }
}

fn trajectory_dict<'py>(py: Python<'py>, t: &Trajectory) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let col = |f: fn(&observables::ObservableRecord) -> f64| {
        t.records.iter().map(f).collect::<Vec<f64>>()
    };
    d.set_item("regime", t.regime.as_str())?;
    d.set_item("t", col(|r| r.t))?;
    d.set_item("x", col(|r| r.x_like))?;
    d.set_item("p", col(|r| r.p_like))?;
    d.set_item("s_ent", col(|r| r.s_ent))?;
    d.set_item("e_osc", col(|r| r.e_osc))?;
    d.set_item("e_ss", col(|r| r.e_ss))?;
    d.set_item("norm", col(|r| r.norm))?;
    d.set_item("total_energy", col(|r| r.total_energy))?;
    d.set_item("max_norm_drift", t.conservation.max_norm_drift)?;
    d.set_item("max_energy_drift", t.conservation.max_energy_drift)?;
    d.set_item("aborted", t.conservation.aborted.clone())?;
    d.set_item("violated", t.conservation.violated())?;
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &ComparisonReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("label", &r.label)?;
    for t in &r.trajectories {
        d.set_item(t.regime.as_str(), trajectory_dict(py, t)?)?;
    }
    let pairs = PyDict::new(py);
    for p in &r.pairs {
        let e = PyDict::new(py);
        e.set_item("phase", p.phase)?;
        e.set_item("s_ent", p.s_ent)?;
        e.set_item("e_osc", p.e_osc)?;
        e.set_item("e_ss", p.e_ss)?;
        pairs.set_item(format!("{}-{}", p.a, p.b), e)?;
    }
    d.set_item("pairs", pairs)?;
    Ok(d)
}

/// Oscillator state `cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩` times the spin state,
/// matched so that `⟨x̂⟩, ⟨p̂⟩` equal `(x0, p0)`.
#[pyfunction]
#[pyo3(signature = (x0, p0, spin, m=1.0, omega=1.0, levels=4))]
fn match_initial_state(
    x0: f64,
    p0: f64,
    spin: Vec<Complex64>,
    m: f64,
    omega: f64,
    levels: usize,
) -> PyResult<Vec<Complex64>> {
    let spin = spin_state(spin)?;
    let psi = scenarios::match_initial_state_with_levels(x0, p0, &spin, m, omega, levels)
        .map_err(py_err)?;
    Ok(psi.amplitudes().to_vec())
}

#[pyfunction]
#[pyo3(signature = (levels=4))]
fn build_ghz(levels: usize) -> PyResult<Vec<Complex64>> {
    if levels < 2 {
        return Err(PyValueError::new_err("levels must be at least 2"));
    }
    Ok(scenarios::build_ghz_with_levels(levels)
        .amplitudes()
        .to_vec())
}

/// Named two-spin state: "++", "+-", "-+", "--" or "bell".
#[pyfunction]
fn spin(name: &str) -> PyResult<Vec<Complex64>> {
    Ok(named_spin_state(name)
        .map_err(py_err)?
        .amplitudes()
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (state, m=1.0, omega=1.0))]
fn expect_xp(state: Vec<Complex64>, m: f64, omega: f64) -> PyResult<(f64, f64)> {
    Ok(observables::expect_xp(&full_state(state)?, m, omega))
}

#[pyfunction]
#[pyo3(signature = (state, regime="qq"))]
fn spin_entropy(state: Vec<Complex64>, regime: &str) -> PyResult<f64> {
    let regime: Regime = regime.parse().map_err(py_err)?;
    Ok(observables::spin_entropy(&any_state(state)?, regime))
}

#[pyfunction]
#[pyo3(signature = (state, params, t_final=10.0, dt=1e-3, sample_every=10, method="rk4"))]
fn evolve_qq<'py>(
    py: Python<'py>,
    state: Vec<Complex64>,
    params: &PyModelParams,
    t_final: f64,
    dt: f64,
    sample_every: usize,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let psi = full_state(state)?;
    let traj = dynamics::evolve_qq(
        &psi,
        &params.to_core()?,
        &integrator(t_final, dt, sample_every, method)?,
    )
    .map_err(py_err)?;
    trajectory_dict(py, &traj)
}

#[pyfunction]
#[pyo3(signature = (x0, p0, spin, params, t_final=10.0, dt=1e-3, sample_every=10, method="rk4"))]
#[allow(clippy::too_many_arguments)]
fn evolve_sc<'py>(
    py: Python<'py>,
    x0: f64,
    p0: f64,
    spin: Vec<Complex64>,
    params: &PyModelParams,
    t_final: f64,
    dt: f64,
    sample_every: usize,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let init = ScState {
        x: x0,
        p: p0,
        psi: spin_state(spin)?,
    };
    let traj = dynamics::evolve_sc(
        &init,
        &params.to_core()?,
        &integrator(t_final, dt, sample_every, method)?,
    )
    .map_err(py_err)?;
    trajectory_dict(py, &traj)
}

#[pyfunction]
#[pyo3(signature = (x0, p0, spin, params, t_final=10.0, dt=1e-3, sample_every=10, method="rk4"))]
#[allow(clippy::too_many_arguments)]
fn evolve_cb<'py>(
    py: Python<'py>,
    x0: f64,
    p0: f64,
    spin: Vec<Complex64>,
    params: &PyModelParams,
    t_final: f64,
    dt: f64,
    sample_every: usize,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params.to_core()?;
    let bg = OscillatorBackground::new(x0, p0, &p);
    let traj = dynamics::evolve_cb(
        &bg,
        &spin_state(spin)?,
        &p,
        &integrator(t_final, dt, sample_every, method)?,
    )
    .map_err(py_err)?;
    trajectory_dict(py, &traj)
}

/// Runs a built-in preset; releases the GIL while integrating.
#[pyfunction]
#[pyo3(signature = (name, t_final=None))]
fn run_preset<'py>(
    py: Python<'py>,
    name: &str,
    t_final: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = scenarios::preset(name).map_err(py_err)?;
    if let Some(t) = t_final {
        cfg.integrator.t_final = t;
    }
    let report = py
        .detach(|| scenarios::run_scenario(&cfg))
        .map_err(py_err)?;
    report_dict(py, &report)
}

/// Runs a scenario given as config-file text.
#[pyfunction]
fn run_config<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse_config(text).map_err(py_err)?;
    let report = py
        .detach(|| scenarios::run_scenario(&cfg))
        .map_err(py_err)?;
    report_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (omega_s, g, m=1.0, omega=1.0))]
fn lambda0_circle(omega_s: f64, g: f64, m: f64, omega: f64) -> PyResult<f64> {
    statics::lambda0_circle(omega_s, g, m, omega).map_err(py_err)
}

#[pyfunction]
fn find_static_solution<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    branch: usize,
    guess: (f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    let s = statics::find_static_solutions(&params.to_core()?, branch, guess).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("branch", s.branch)?;
    d.set_item("x", s.x)?;
    d.set_item("p", s.p)?;
    d.set_item("eigenvalue", s.eigenvalue)?;
    d.set_item("residual", s.residual)?;
    d.set_item("iterations", s.iterations)?;
    d.set_item("eigenstate", s.eigenstate.amplitudes().to_vec())?;
    Ok(d)
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    PRESET_NAMES.to_vec()
}

#[pymodule]
#[pyo3(name = "hybridyn")]
fn hybridyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_function(wrap_pyfunction!(match_initial_state, m)?)?;
    m.add_function(wrap_pyfunction!(build_ghz, m)?)?;
    m.add_function(wrap_pyfunction!(spin, m)?)?;
    m.add_function(wrap_pyfunction!(expect_xp, m)?)?;
    m.add_function(wrap_pyfunction!(spin_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_qq, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_sc, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_cb, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(lambda0_circle, m)?)?;
    m.add_function(wrap_pyfunction!(find_static_solution, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    Ok(())
}
