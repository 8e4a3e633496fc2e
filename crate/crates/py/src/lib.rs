//! Python bindings: scenarios, runs, exported results and property lookups.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cooler_core::output::{export, segment_groups, OutputBundle, SegmentProfile};
use cooler_core::run::{run, Mode};
use cooler_core::scenario::{Scenario, ScenarioError, ScenarioFile};
use cooler_core::solver::settling_time;
use cooler_core::species::{N_GAS, N_SOLID};
use cooler_core::thermo::{gas_emissivity, mixture_transport, WsggTable, P_REF};
use cooler_core::{Phase, SpeciesId, SpeciesTable};

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn species(name: &str) -> PyResult<SpeciesId> {
    name.parse().map_err(|e| PyValueError::new_err(format!("{e}")))
}

/// A validated cooler scenario.
#[pyclass(name = "Scenario", module = "clinker_cooler", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: Scenario,
}

impl PyScenario {
    fn rebuild(&mut self, edit: impl FnOnce(&mut ScenarioFile)) -> PyResult<()> {
        let mut file = self.inner.file.clone();
        edit(&mut file);
        file.integrator.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
        self.inner = file.build().map_err(scenario_err)?;
        Ok(())
    }
}

#[pymethods]
impl PyScenario {
    /// The bundled 10-segment scenario.
    #[staticmethod]
    fn bundled() -> Self {
        PyScenario { inner: Scenario::bundled() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = ScenarioFile::from_json(text).and_then(ScenarioFile::build).map_err(scenario_err)?;
        Ok(PyScenario { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = ScenarioFile::load(&path).and_then(ScenarioFile::build).map_err(scenario_err)?;
        Ok(PyScenario { inner })
    }

    fn to_json(&self) -> String {
        self.inner.file.to_json()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.file.name.clone()
    }

    #[getter]
    fn n_segments(&self) -> usize {
        self.inner.model.grid.n_v
    }

    #[getter]
    fn n_layers(&self) -> usize {
        self.inner.model.grid.n_y
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.file.integrator.t_end
    }

    #[setter]
    fn set_t_end(&mut self, t: f64) -> PyResult<()> {
        self.rebuild(|f| f.integrator.t_end = t)
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.file.integrator.dt
    }

    #[setter]
    fn set_dt(&mut self, dt: f64) -> PyResult<()> {
        self.rebuild(|f| f.integrator.dt = dt)
    }

    /// Runs the scenario; `mode` is "dynamic" or "steady".
    #[pyo3(signature = (mode = "dynamic"))]
    fn run(&self, py: Python<'_>, mode: &str) -> PyResult<PyRunResult> {
        let mode: Mode = mode.parse().map_err(PyValueError::new_err)?;
        let scenario = self.inner.clone();
        let bundle = py.detach(|| run(&scenario, mode)).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(PyRunResult { scenario, bundle })
    }

    fn __repr__(&self) -> String {
        format!("Scenario({:?}, {} segments x {} layers)", self.inner.file.name, self.n_segments(), self.n_layers())
    }
}

/// Outcome of a run: trajectory, per-segment profiles and metadata.
#[pyclass(name = "RunResult", module = "clinker_cooler")]
struct PyRunResult {
    scenario: Scenario,
    bundle: OutputBundle,
}

fn profile_dict<'py>(py: Python<'py>, p: &SegmentProfile) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("segment", p.segment + 1)?;
    d.set_item("position", p.position)?;
    d.set_item("solid_temperature", p.solid_temperature)?;
    d.set_item("air_temperature", p.air_temperature)?;
    d.set_item("pressure", p.pressure)?;
    let flows = PyDict::new(py);
    let conc = PyDict::new(py);
    for (i, id) in SpeciesId::SOLIDS.iter().enumerate() {
        flows.set_item(id.name(), p.solid_mass_flow[i])?;
        conc.set_item(id.name(), p.concentration[i])?;
    }
    d.set_item("solid_mass_flow", flows)?;
    d.set_item("concentration", conc)?;
    Ok(d)
}

#[pymethods]
impl PyRunResult {
    /// Sample times, s.
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.bundle.trajectory.times.clone()
    }

    /// Per-segment profiles as dictionaries (temperatures in K, pressure in Pa,
    /// mass flows in kg/s, concentrations in mol/m3).
    #[getter]
    fn profiles<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.bundle.profiles.iter().map(|p| profile_dict(py, p)).collect()
    }

    /// Run metadata as a JSON string.
    fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.bundle.meta).expect("metadata serializes")
    }

    #[getter]
    fn outlet_temperature(&self) -> Option<(f64, f64)> {
        let m = &self.bundle.meta;
        m.outlet_temperature_last.zip(m.outlet_temperature_extrapolated)
    }

    /// Algebraic states `(T_s, T_a, P)` of every cell at sample `i`.
    fn algebraic_state(&self, i: usize) -> PyResult<Vec<(f64, f64, f64)>> {
        let y = self.bundle.trajectory.y.get(i).ok_or_else(|| PyValueError::new_err("sample index out of range"))?;
        Ok(y.chunks(3).map(|c| (c[0], c[1], c[2])).collect())
    }

    /// Per-segment settling time in s (None if not settled) for a relative band.
    #[pyo3(signature = (threshold = 0.01))]
    fn settling_times(&self, threshold: f64) -> Vec<Option<f64>> {
        settling_time(&self.bundle.trajectory, &segment_groups(&self.scenario.model), threshold)
            .into_iter()
            .map(|s| s.seconds())
            .collect()
    }

    /// Writes timeseries.csv, steady_profiles.csv and run_meta.json.
    fn export(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        std::fs::create_dir_all(&dir).map_err(|e| PyOSError::new_err(format!("{}: {e}", dir.display())))?;
        export(&self.bundle, &self.scenario.model, &dir).map_err(|e| PyOSError::new_err(e.to_string()))
    }
}

/// Pure-species properties at `t` (K): cp (J/(mol K)), h (J/mol), k (W/(m K)),
/// and mu (Pa s) for gases.
#[pyfunction]
fn species_properties<'py>(py: Python<'py>, name: &str, t: f64) -> PyResult<Bound<'py, PyDict>> {
    let id = species(name)?;
    let table = SpeciesTable::embedded();
    let data = table.get(id);
    let mut unit = vec![0.0; if id.phase() == Phase::Solid { N_SOLID } else { N_GAS }];
    unit[id.index()] = 1.0;
    let d = PyDict::new(py);
    d.set_item("molar_mass", data.molar_mass)?;
    d.set_item("cp", table.cp_molar(id, t))?;
    d.set_item("h", table.enthalpy(id.phase(), t, P_REF, &unit))?;
    d.set_item("k", data.conductivity(t))?;
    if id.phase() == Phase::Gas {
        d.set_item("mu", table.sutherland_viscosity(id, t))?;
    } else {
        d.set_item("density", data.density)?;
    }
    Ok(d)
}

/// Mixture viscosity (Pa s) and conductivity (W/(m K)) for mole fractions
/// given as `{name: fraction}`.
#[pyfunction]
fn mixture_properties(fractions: std::collections::HashMap<String, f64>, t: f64) -> PyResult<(f64, f64)> {
    let mut x = [0.0; N_GAS];
    for (name, v) in fractions {
        let id = species(&name)?;
        if id.phase() != Phase::Gas {
            return Err(PyValueError::new_err(format!("{id} is not a gas")));
        }
        x[id.index()] += v;
    }
    let total: f64 = x.iter().sum();
    if !(total > 0.0) {
        return Err(PyValueError::new_err("mole fractions sum to zero"));
    }
    x.iter_mut().for_each(|v| *v /= total);
    Ok(mixture_transport(&SpeciesTable::embedded(), &x, t))
}

/// Gas emissivity for H2O/CO2 mole fractions, temperature (K), pressure (Pa)
/// and path length (m).
#[pyfunction]
#[pyo3(signature = (x_h2o, x_co2, t, p = P_REF, path_length = 1.5))]
fn emissivity(x_h2o: f64, x_co2: f64, t: f64, p: f64, path_length: f64) -> f64 {
    gas_emissivity(&WsggTable::default(), x_h2o, x_co2, t, p, path_length)
}

#[pymodule]
fn clinker_cooler(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(species_properties, m)?)?;
    m.add_function(wrap_pyfunction!(mixture_properties, m)?)?;
    m.add_function(wrap_pyfunction!(emissivity, m)?)?;
    m.add("SOLIDS", SpeciesId::SOLIDS.iter().map(|s| s.name()).collect::<Vec<_>>())?;
    m.add("GASES", SpeciesId::GASES.iter().map(|s| s.name()).collect::<Vec<_>>())?;
    Ok(())
}
