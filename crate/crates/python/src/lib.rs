//! Python module `bdca`: problems, networks, solvers and the analysis tools.

use boosted_dc::analysis::{self, AuditParams, RateConfig};
use boosted_dc::biochem::{self, GeneratorConfig, NetworkObjective, ReactionNetwork};
use boosted_dc::harness::{self, ExperimentSpec, DEFAULT_RHO};
use boosted_dc::{builtins, DcProblem, SolverConfig, TraceRecord, Vector};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Hands a serializable value to Python through `json.loads`.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn vector(x: Vec<f64>, m: usize) -> PyResult<Vector> {
    if x.len() != m {
        return Err(PyValueError::new_err(format!("expected {m} entries, got {}", x.len())));
    }
    Ok(Vector::from_vec(x))
}

/// A DC program ready for the solvers.
#[pyclass(name = "Problem", module = "bdca", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: DcProblem,
}

#[pymethods]
impl PyProblem {
    /// A builtin problem: "quartic" or "expsys".
    #[staticmethod]
    #[pyo3(signature = (name, rho=None))]
    fn builtin(name: &str, rho: Option<f64>) -> PyResult<Self> {
        let p = builtins::builtin(name).ok_or_else(|| PyValueError::new_err(format!("unknown builtin '{name}'")))?;
        let inner = match rho {
            Some(r) => p.with_rho(r).map_err(value_err)?,
            None => p,
        };
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho()
    }

    fn phi(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.phi(&vector(x, self.inner.dim())?).map_err(value_err)
    }

    fn grad(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let g = self.inner.grad_phi(&vector(x, self.inner.dim())?).map_err(value_err)?;
        Ok(g.iter().copied().collect())
    }

    fn __repr__(&self) -> String {
        format!("Problem(name={:?}, dim={}, rho={})", self.inner.name(), self.inner.dim(), self.inner.rho())
    }
}

/// A reaction network with stoichiometric matrices `F`, `R` and log rate
/// constants `w`.
#[pyclass(name = "Network", module = "bdca", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    inner: ReactionNetwork,
}

#[pymethods]
impl PyNetwork {
    /// Random mass-conserving network, reproducible from `seed`.
    #[staticmethod]
    #[pyo3(signature = (m, n, seed=0))]
    fn generate(m: usize, n: usize, seed: u64) -> PyResult<Self> {
        let inner = biochem::generate_network(m, n, seed, &GeneratorConfig::default()).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        biochem::load_network(path)
            .map(|inner| Self { inner })
            .map_err(|e| match e {
                biochem::ModelError::Io { .. } => PyIOError::new_err(e.to_string()),
                other => value_err(other),
            })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        biochem::parse_network(text).map(|inner| Self { inner }).map_err(value_err)
    }

    fn to_json(&self) -> String {
        biochem::to_json(&self.inner)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        biochem::save_network(&self.inner, path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w().to_vec()
    }

    /// `max |(R - F)^T l|`, with `l` all ones by default.
    #[pyo3(signature = (l=None))]
    fn conservation_residual(&self, l: Option<Vec<f64>>) -> PyResult<f64> {
        self.inner
            .check_mass_conservation(l.as_deref())
            .map(|(r, _)| r)
            .map_err(value_err)
    }

    /// Net production `f(x)`.
    fn rates(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let obj = NetworkObjective::new(self.inner.clone());
        let r = obj.eval_rates(&vector(x, self.inner.m())?).map_err(value_err)?;
        Ok(r.f.iter().copied().collect())
    }

    /// The steady-state problem `min |f(x)|^2` regularized by `rho`.
    #[pyo3(signature = (rho=DEFAULT_RHO))]
    fn problem(&self, rho: f64) -> PyResult<PyProblem> {
        let inner = NetworkObjective::new(self.inner.clone()).into_problem(rho).map_err(value_err)?;
        Ok(PyProblem { inner })
    }

    fn __repr__(&self) -> String {
        format!("Network(name={:?}, m={}, n={})", self.inner.name, self.inner.m(), self.inner.n())
    }
}

/// Outcome of one solver run.
#[pyclass(name = "SolveResult", module = "bdca", frozen)]
struct PySolveResult {
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    phi: f64,
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    elapsed_ms: f64,
    #[pyo3(get)]
    message: Option<String>,
    records: Vec<TraceRecord>,
}

#[pymethods]
impl PySolveResult {
    /// Per-iteration records as a list of dicts.
    #[getter]
    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.records)
    }

    /// Audits the trace against the descent inequalities.
    #[pyo3(signature = (problem, alpha=0.4))]
    fn audit<'py>(&self, py: Python<'py>, problem: &PyProblem, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
        let params = AuditParams::for_problem(&problem.inner, alpha);
        to_py(py, &analysis::audit_trace(&self.records, Some(self.phi), &params))
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={:?}, iterations={}, phi={:e})",
            self.status, self.iterations, self.phi
        )
    }
}

/// Runs DCA or a boosted variant from `x0`.
#[pyfunction]
#[pyo3(signature = (problem, x0, variant="bdca-qi", alpha=0.4, beta=0.5, lambda_bar=50.0, lambda_max=200.0, max_iters=5000, tol=None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    x0: Vec<f64>,
    variant: &str,
    alpha: f64,
    beta: f64,
    lambda_bar: f64,
    lambda_max: f64,
    max_iters: usize,
    tol: Option<f64>,
) -> PyResult<PySolveResult> {
    let cfg = SolverConfig {
        variant: variant.parse().map_err(value_err)?,
        alpha,
        beta,
        lambda_bar,
        lambda_max,
        max_outer_iters: max_iters,
        tol_d: tol,
        tol_x: tol,
        ..SolverConfig::default()
    };
    let x0 = vector(x0, problem.inner.dim())?;
    let p = problem.inner.clone();
    let res = py
        .detach(move || boosted_dc::solve(&p, &x0, &cfg))
        .map_err(value_err)?;
    Ok(PySolveResult {
        x: res.x_final.iter().copied().collect(),
        phi: res.phi_final,
        status: res.status.to_string(),
        iterations: res.iterations,
        elapsed_ms: res.elapsed_ms,
        message: res.message,
        records: res.trace,
    })
}

/// Classifies a nonnegative sequence as Finite, Linear, Sublinear or
/// Inconclusive.
#[pyfunction]
#[pyo3(signature = (s, min_len=10))]
fn classify_rate<'py>(py: Python<'py>, s: Vec<f64>, min_len: usize) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RateConfig {
        min_len,
        ..RateConfig::default()
    };
    to_py(py, &analysis::classify_rate(&s, &cfg))
}

/// `s_k^alpha <= beta (s_k - s_{k+1})` for every `k >= from_index`.
#[pyfunction]
#[pyo3(signature = (s, alpha, beta, from_index=0))]
fn verify_rate_inequality(s: Vec<f64>, alpha: f64, beta: f64, from_index: usize) -> bool {
    analysis::verify_rate_inequality(&s, alpha, beta, from_index)
}

/// Runs a matched-target experiment described by a JSON spec and returns the
/// table rows as dicts.
#[pyfunction]
fn compare<'py>(py: Python<'py>, spec_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let spec: ExperimentSpec = serde_json::from_str(spec_json).map_err(value_err)?;
    let out = py.detach(|| harness::run_experiment(&spec)).map_err(value_err)?;
    to_py(py, &out.rows)
}

#[pymodule]
fn bdca(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(classify_rate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_rate_inequality, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
