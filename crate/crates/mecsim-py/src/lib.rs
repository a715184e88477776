//! Python bindings: scenario configuration, single runs, and policy
//! comparisons, driven in-process.
//!
//! ```python
//! import mecsim_py as m
//!
//! cfg = m.ScenarioConfig()
//! cfg.traffic_mean = 8.0
//! cfg.set("num_slots", "200")
//! result = m.run(cfg, "cgm")
//! print(result.service_rate, result.total_utility)
//! ```

// The pymethods/pyfunction expansions trip this lint on current clippy.
#![allow(clippy::useless_conversion)]

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Scenario configuration. Fields can be set through native properties or
/// by config-file key via `set(key, value)`.
#[pyclass(name = "ScenarioConfig")]
#[derive(Clone)]
struct PyScenarioConfig {
    inner: mecsim::ScenarioConfig,
}

#[pymethods]
impl PyScenarioConfig {
    #[new]
    fn new() -> Self {
        Self {
            inner: mecsim::ScenarioConfig::default(),
        }
    }

    /// Loads a key=value config file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        mecsim::load_config(path)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    /// Sets one field by its config-file key, e.g. set("traffic_mean", "8").
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        mecsim::set_key(&mut self.inner, key, value).map_err(value_err)
    }

    #[getter]
    fn num_servers(&self) -> u32 {
        self.inner.num_servers
    }

    #[setter]
    fn set_num_servers(&mut self, v: u32) {
        self.inner.num_servers = v;
    }

    #[getter]
    fn num_slots(&self) -> u32 {
        self.inner.num_slots
    }

    #[setter]
    fn set_num_slots(&mut self, v: u32) {
        self.inner.num_slots = v;
    }

    #[getter]
    fn traffic_mean(&self) -> f64 {
        self.inner.traffic_mean
    }

    #[setter]
    fn set_traffic_mean(&mut self, v: f64) {
        self.inner.traffic_mean = v;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.seed = v;
    }

    fn __repr__(&self) -> String {
        format!(
            "ScenarioConfig(num_servers={}, num_slots={}, traffic_mean={}, seed={})",
            self.inner.num_servers,
            self.inner.num_slots,
            self.inner.traffic_mean,
            self.inner.seed
        )
    }
}

/// Result of one policy run.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    inner: mecsim::RunResult,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn policy(&self) -> &str {
        &self.inner.policy
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn num_slots(&self) -> usize {
        self.inner.per_slot.len()
    }

    #[getter]
    fn total_served(&self) -> u64 {
        self.inner.total_served
    }

    #[getter]
    fn total_denied(&self) -> u64 {
        self.inner.total_denied
    }

    #[getter]
    fn service_rate(&self) -> f64 {
        self.inner.service_rate
    }

    #[getter]
    fn total_utility(&self) -> f64 {
        self.inner.total_utility
    }

    #[getter]
    fn total_energy(&self) -> f64 {
        self.inner.total_energy
    }

    #[getter]
    fn energy_per_unit_utility(&self) -> f64 {
        self.inner.energy_per_unit_utility
    }

    #[getter]
    fn zero_arrivals(&self) -> bool {
        self.inner.zero_arrivals
    }

    /// Per-slot arrival counts.
    fn arrivals(&self) -> Vec<u32> {
        self.inner.per_slot.iter().map(|r| r.arrivals).collect()
    }

    fn served(&self) -> Vec<u32> {
        self.inner.per_slot.iter().map(|r| r.served).collect()
    }

    fn denied(&self) -> Vec<u32> {
        self.inner.per_slot.iter().map(|r| r.denied).collect()
    }

    fn active_servers(&self) -> Vec<u32> {
        self.inner.per_slot.iter().map(|r| r.active_servers).collect()
    }

    fn slot_utility(&self) -> Vec<f64> {
        self.inner.per_slot.iter().map(|r| r.slot_utility).collect()
    }

    fn slot_energy(&self) -> Vec<f64> {
        self.inner.per_slot.iter().map(|r| r.slot_energy).collect()
    }

    /// The run rendered as a per-slot CSV document.
    fn to_csv(&self) -> String {
        mecsim::per_slot_csv(&[&self.inner])
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(policy={:?}, seed={}, service_rate={:.4}, total_utility={:.4}, total_energy={:.2})",
            self.inner.policy,
            self.inner.seed,
            self.inner.service_rate,
            self.inner.total_utility,
            self.inner.total_energy,
        )
    }
}

/// The eight policy names accepted by run() and compare().
#[pyfunction]
fn policy_names() -> Vec<&'static str> {
    mecsim::POLICY_NAMES.to_vec()
}

/// Samples the scenario described by the config and runs one policy on it.
#[pyfunction]
fn run(config: &PyScenarioConfig, policy: &str) -> PyResult<PyRunResult> {
    let spec = mecsim::PolicySpec::from_name(policy).map_err(value_err)?;
    let scenario = mecsim::sample_scenario(&config.inner).map_err(value_err)?;
    let result = mecsim::run(&scenario, &spec).map_err(value_err)?;
    Ok(PyRunResult { inner: result })
}

/// Runs several policies on identical copies of one sampled scenario and
/// returns a dict keyed by policy name. Pass ["all"] for every policy.
#[pyfunction]
fn compare(config: &PyScenarioConfig, policies: Vec<String>) -> PyResult<BTreeMap<String, PyRunResult>> {
    let specs: Vec<mecsim::PolicySpec> = if policies.iter().any(|p| p == "all") {
        mecsim::PolicySpec::all()
    } else {
        policies
            .iter()
            .map(|p| mecsim::PolicySpec::from_name(p))
            .collect::<Result<_, _>>()
            .map_err(value_err)?
    };
    let scenario = mecsim::sample_scenario(&config.inner).map_err(value_err)?;
    let results = mecsim::compare(&scenario, &specs).map_err(value_err)?;
    Ok(results
        .into_iter()
        .map(|(name, inner)| (name, PyRunResult { inner }))
        .collect())
}

/// Utility earned for holding (c, r, h) for t slots at distance d under
/// coefficients (gamma1, gamma2, gamma3, gamma4, gamma5).
#[pyfunction]
fn utility(c: f64, r: f64, h: f64, t: f64, d: f64, gammas: (f64, f64, f64, f64, f64)) -> PyResult<f64> {
    let coeffs = mecsim::Coefficients::new(gammas.0, gammas.1, gammas.2, gammas.3, gammas.4);
    mecsim::utility(c, r, h, t, d, &coeffs).map_err(value_err)
}

#[pymodule]
fn mecsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyScenarioConfig>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(policy_names, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    Ok(())
}
