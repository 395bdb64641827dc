//! Python bindings: objectives, drift constructions, verification and
//! seeded experiments. Reports are returned as plain dicts.

use driftlab::drift::{construct as build, default_params, DriftConstruction, DriftParams};
use driftlab::ea::default_max_evaluations;
use driftlab::experiments::runs::{estimate_nu, experiment_params, instance_seed};
use driftlab::experiments::{generate_family, lower_bound_experiment, scaling_experiment, tail_experiment, FamilySpec};
use driftlab::verify::{check_weight_lemmas, exact_drift_factor, verify_feasibility, VerifyMode, VerifyOptions};
use driftlab::{run_ea, BitString, LinearObjective, MutationParams};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: driftlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn family(name: &str) -> PyResult<FamilySpec> {
    name.parse().map_err(err)
}

fn bits(text: &str) -> PyResult<BitString> {
    text.parse().map_err(err)
}

/// Linear pseudo-Boolean objective with sorted positive coefficients.
#[pyclass(name = "Objective", frozen)]
struct PyObjective {
    inner: LinearObjective,
}

#[pymethods]
impl PyObjective {
    #[staticmethod]
    fn onemax(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(PyObjective { inner: LinearObjective::onemax(n) })
    }

    #[staticmethod]
    fn binval(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(PyObjective { inner: LinearObjective::binval(n) })
    }

    /// Normalizes arbitrary nonzero coefficients (signs flipped, sorted).
    #[staticmethod]
    fn from_coefficients(coefficients: Vec<f64>) -> PyResult<Self> {
        Ok(PyObjective { inner: LinearObjective::normalize(&coefficients).map_err(err)? })
    }

    /// Same instance as the command line tool for the same family, `n` and seed.
    #[staticmethod]
    #[pyo3(signature = (name, n, seed = 0))]
    fn family(name: &str, n: usize, seed: u64) -> PyResult<Self> {
        Ok(PyObjective { inner: generate_family(&family(name)?, n, instance_seed(seed, n)).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Natural logarithms of the coefficients, lowest position first.
    fn ln_coefficients(&self) -> Vec<f64> {
        (1..=self.inner.n()).map(|i| self.inner.ln_coefficient(i)).collect()
    }

    /// `f(x)` for a bit string written `x_n ... x_1`.
    fn evaluate(&self, x: &str) -> PyResult<f64> {
        Ok(self.inner.evaluate(&bits(x)?).map_err(err)?.to_f64())
    }

    fn __repr__(&self) -> String {
        format!("Objective(n={})", self.inner.n())
    }
}

/// Block structure, weights and jump partition for one objective.
#[pyclass(name = "Construction", frozen)]
struct PyConstruction {
    inner: DriftConstruction,
}

#[pymethods]
impl PyConstruction {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.params.c
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.params.gamma
    }

    #[getter]
    fn log2_k(&self) -> f64 {
        self.inner.params.log2_k()
    }

    #[getter]
    fn ln_weights(&self) -> Vec<f64> {
        self.inner.weights.ln_weights().to_vec()
    }

    #[getter]
    fn jumps(&self) -> Vec<usize> {
        self.inner.partition.jumps.clone()
    }

    #[getter]
    fn ln_phi_max(&self) -> f64 {
        self.inner.ln_phi_max()
    }

    fn block_count(&self) -> usize {
        self.inner.structure.blocks.len()
    }

    fn ln_phi(&self, x: &str) -> PyResult<f64> {
        self.inner.weights.ln_phi(&bits(x)?).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Construction(n={}, blocks={}, jumps={})",
            self.inner.n(),
            self.inner.structure.blocks.len(),
            self.inner.partition.jumps.len()
        )
    }
}

fn params(c: f64, epsilon: f64, log2_k: Option<f64>, gamma: Option<f64>) -> PyResult<DriftParams> {
    let ln_k = log2_k.map(|l| l * std::f64::consts::LN_2);
    match gamma {
        Some(g) => {
            let ln_k = match ln_k {
                Some(v) => v,
                None => default_params(c, epsilon, None).map_err(err)?.ln_k,
            };
            DriftParams::manual(c, epsilon, ln_k, g).map_err(err)
        }
        None => default_params(c, epsilon, ln_k).map_err(err),
    }
}

#[pyfunction]
#[pyo3(signature = (objective, c = 1.0, epsilon = 0.5, log2_k = None, gamma = None))]
fn construct(
    objective: &PyObjective,
    c: f64,
    epsilon: f64,
    log2_k: Option<f64>,
    gamma: Option<f64>,
) -> PyResult<PyConstruction> {
    let p = params(c, epsilon, log2_k, gamma)?;
    Ok(PyConstruction { inner: build(&objective.inner, &p).map_err(err)? })
}

/// Exact `E[Φ(x')]` and drift factor at one state.
#[pyfunction]
fn drift_at<'py>(
    py: Python<'py>,
    objective: &PyObjective,
    construction: &PyConstruction,
    x: &str,
    c: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let est = exact_drift_factor(&objective.inner, &construction.inner.weights, &bits(x)?, c).map_err(err)?;
    to_dict(py, &est)
}

#[pyfunction]
#[pyo3(signature = (objective, construction, c, mode = None, budget = 2000, seed = 0, mc_samples = 100_000))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    objective: &PyObjective,
    construction: &PyConstruction,
    c: f64,
    mode: Option<&str>,
    budget: usize,
    seed: u64,
    mc_samples: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = match mode {
        None if objective.inner.n() <= 12 => VerifyMode::Exhaustive,
        None | Some("sampled") => VerifyMode::Sampled,
        Some("exhaustive") => VerifyMode::Exhaustive,
        Some(other) => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let options = VerifyOptions { mode, budget, seed, epsilon: construction.inner.params.epsilon, mc_samples };
    let c_ = &construction.inner;
    let report = py
        .detach(|| verify_feasibility(&objective.inner, &c_.weights, c, Some(&c_.partition), &options))
        .map_err(err)?;
    to_dict(py, &report)
}

#[pyfunction]
fn lemmas<'py>(py: Python<'py>, construction: &PyConstruction) -> PyResult<Bound<'py, PyAny>> {
    let report = check_weight_lemmas(&construction.inner.weights, &construction.inner.structure).map_err(err)?;
    to_dict(py, &report)
}

/// One (1+1) EA run; returns the run record.
#[pyfunction]
#[pyo3(signature = (objective, c = 1.0, seed = 0, max_evaluations = None))]
fn run<'py>(
    py: Python<'py>,
    objective: &PyObjective,
    c: f64,
    seed: u64,
    max_evaluations: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let n = objective.inner.n();
    let mp = MutationParams::new(c, n).map_err(err)?;
    let cap = max_evaluations.unwrap_or_else(|| default_max_evaluations(n, c));
    let record = py.detach(|| run_ea(&objective.inner, &mp, seed, cap)).map_err(err)?;
    to_dict(py, &record)
}

#[pyfunction]
#[pyo3(signature = (family, c_list, n_grid, reps = 100, seed = 0))]
fn scaling<'py>(
    py: Python<'py>,
    family: &str,
    c_list: Vec<f64>,
    n_grid: Vec<usize>,
    reps: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = self::family(family)?;
    let result = py.detach(|| scaling_experiment(&spec, &c_list, &n_grid, reps, seed)).map_err(err)?;
    to_dict(py, &result)
}

#[pyfunction]
#[pyo3(signature = (family, n, c = 1.0, reps = 10_000, lambdas = vec![1.0, 2.0, 3.0], seed = 0))]
fn tail<'py>(
    py: Python<'py>,
    family: &str,
    n: usize,
    c: f64,
    reps: usize,
    lambdas: Vec<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = self::family(family)?;
    let result = py
        .detach(|| {
            let p = experiment_params(c)?;
            let f = generate_family(&spec, n, instance_seed(seed, n))?;
            let ln_phi_max = build(&f, &p)?.ln_phi_max();
            let nu = estimate_nu(&spec, n, c, &p, seed)?;
            tail_experiment(&spec, n, c, reps, &lambdas, seed, nu, ln_phi_max)
        })
        .map_err(err)?;
    to_dict(py, &result)
}

#[pyfunction]
#[pyo3(signature = (family, n, c = 1.0, reps = 200, seed = 0))]
fn lower_bound<'py>(
    py: Python<'py>,
    family: &str,
    n: usize,
    c: f64,
    reps: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = self::family(family)?;
    let result = py.detach(|| lower_bound_experiment(&spec, n, c, reps, seed)).map_err(err)?;
    to_dict(py, &result)
}

#[pymodule]
pub fn driftlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyObjective>()?;
    m.add_class::<PyConstruction>()?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(drift_at, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(lemmas, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(scaling, m)?)?;
    m.add_function(wrap_pyfunction!(tail, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    Ok(())
}
