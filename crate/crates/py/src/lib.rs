//! Python bindings for `jointsparse`.
//!
//! Matrices cross the boundary as lists of rows (`list[list[float]]`); any
//! nested sequence of floats, including a 2-D NumPy array, is accepted as input.
//! Solver calls release the GIL.

use jointsparse::admm::SolverConfig;
use jointsparse::baselines::{solve_baseline, BaselineConfig};
use jointsparse::matrix::{self, DenseMatrix};
use jointsparse::projection::{self, DEFAULT_RANK_TOL};
use jointsparse::{Backend, Error, InstanceSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numeric(_) | Error::Divergence { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: &Rows) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(rows).map_err(py_err)
}

fn parse_backend(name: &str) -> PyResult<Backend> {
    match name.to_ascii_lowercase().as_str() {
        "plain" => Ok(Backend::Plain),
        "smw" => Ok(Backend::Smw),
        other => Err(PyValueError::new_err(format!(
            "unknown backend `{other}`; expected `plain` or `smw`"
        ))),
    }
}

/// A generated instance `Y = Φ S` with its true row support.
#[pyclass(name = "ProblemInstance", module = "jointsparse_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyProblemInstance {
    n: usize,
    m: usize,
    k: usize,
    j: usize,
    seed: u64,
    phi: Rows,
    s_true: Rows,
    y: Rows,
    support: Vec<usize>,
}

#[pymethods]
impl PyProblemInstance {
    fn __repr__(&self) -> String {
        format!(
            "ProblemInstance(n={}, m={}, k={}, j={}, seed={})",
            self.n, self.m, self.k, self.j, self.seed
        )
    }
}

/// Output of any solver. `residual_history` holds one `(primal, change, dual)`
/// tuple per iteration.
#[pyclass(name = "SolverResult", module = "jointsparse_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PySolverResult {
    s_hat: Rows,
    s_final: Option<Rows>,
    iterations: usize,
    termination: String,
    residual_history: Vec<(f64, f64, f64)>,
    kkt_stationarity: f64,
    wall_time_seconds: f64,
}

#[pymethods]
impl PySolverResult {
    fn __repr__(&self) -> String {
        format!(
            "SolverResult(iterations={}, termination='{}', kkt_stationarity={:e})",
            self.iterations, self.termination, self.kkt_stationarity
        )
    }
}

impl From<jointsparse::SolverResult> for PySolverResult {
    fn from(r: jointsparse::SolverResult) -> Self {
        Self {
            s_hat: r.s_hat.to_rows(),
            s_final: r.s_final.map(|s| s.to_rows()),
            iterations: r.iterations,
            termination: r.termination.to_string(),
            residual_history: r
                .residual_history
                .iter()
                .map(|t| (t.primal, t.change, t.dual))
                .collect(),
            kkt_stationarity: r.kkt_stationarity,
            wall_time_seconds: r.wall_time_seconds,
        }
    }
}

/// Draws a normalized Gaussian `Φ`, a `k`-row-sparse `S` and `Y = Φ S`.
#[pyfunction]
#[pyo3(signature = (n, m, k, j, seed = 0))]
fn generate(py: Python<'_>, n: usize, m: usize, k: usize, j: usize, seed: u64) -> PyResult<PyProblemInstance> {
    let inst = py
        .detach(|| jointsparse::generate(InstanceSpec::new(n, m, k, j, seed)))
        .map_err(py_err)?;
    Ok(PyProblemInstance {
        n,
        m,
        k,
        j,
        seed,
        phi: inst.phi.to_rows(),
        s_true: inst.s_true.to_rows(),
        y: inst.y.to_rows(),
        support: inst.support.indices().to_vec(),
    })
}

/// ℓ2,0-constrained ADMM with row budget `s`.
#[pyfunction]
#[pyo3(signature = (phi, y, s, *, rho = 1.0, max_iter = 1000, eps = 1e-6, backend = "plain", seed = 0, criterion = true))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    phi: Rows,
    y: Rows,
    s: usize,
    rho: f64,
    max_iter: usize,
    eps: f64,
    backend: &str,
    seed: u64,
    criterion: bool,
) -> PyResult<PySolverResult> {
    let (phi, y) = (to_matrix(&phi)?, to_matrix(&y)?);
    let cfg = SolverConfig {
        rho,
        max_iter,
        eps_primal: eps,
        eps_change: eps,
        eps_dual: eps,
        backend: parse_backend(backend)?,
        seed,
        criterion_enabled: criterion,
        ..SolverConfig::new(s)
    };
    let res = py.detach(|| jointsparse::solve(&phi, &y, &cfg)).map_err(py_err)?;
    Ok(res.into())
}

fn run_baseline(py: Python<'_>, phi: Rows, y: Rows, cfg: BaselineConfig) -> PyResult<PySolverResult> {
    let (phi, y) = (to_matrix(&phi)?, to_matrix(&y)?);
    let res = py.detach(|| solve_baseline(&phi, &y, &cfg)).map_err(py_err)?;
    Ok(res.into())
}

/// Simultaneous orthogonal matching pursuit selecting `k` rows.
#[pyfunction]
fn somp(py: Python<'_>, phi: Rows, y: Rows, k: usize) -> PyResult<PySolverResult> {
    run_baseline(py, phi, y, BaselineConfig::somp(k))
}

/// Simultaneous normalized iterative hard thresholding with `k` rows.
#[pyfunction]
#[pyo3(signature = (phi, y, k, *, max_iter = 1000))]
fn sniht(py: Python<'_>, phi: Rows, y: Rows, k: usize, max_iter: usize) -> PyResult<PySolverResult> {
    run_baseline(py, phi, y, BaselineConfig { max_iter, ..BaselineConfig::sniht(k) })
}

/// ℓ2,1-regularized ADMM (group soft thresholding).
#[pyfunction]
#[pyo3(signature = (phi, y, *, lam = 1e-6, rho = 1e-5, max_iter = 1000, eps = 1e-6, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn admm_l21(
    py: Python<'_>,
    phi: Rows,
    y: Rows,
    lam: f64,
    rho: f64,
    max_iter: usize,
    eps: f64,
    seed: u64,
) -> PyResult<PySolverResult> {
    let cfg = BaselineConfig {
        lambda: lam,
        rho,
        max_iter,
        eps,
        seed,
        ..BaselineConfig::admm_l21()
    };
    run_baseline(py, phi, y, cfg)
}

/// Keeps the `s` rows of largest norm and zeros the rest.
#[pyfunction]
fn project_row_sparse(x: Rows, s: usize) -> PyResult<Rows> {
    Ok(projection::project_row_sparse(&to_matrix(&x)?, s).map_err(py_err)?.to_rows())
}

#[pyfunction]
fn row_norms(x: Rows) -> PyResult<Vec<f64>> {
    Ok(matrix::row_norms(&to_matrix(&x)?))
}

/// Number of rows whose norm exceeds `tol`.
#[pyfunction]
#[pyo3(signature = (x, tol = 0.0))]
fn l20_norm(x: Rows, tol: f64) -> PyResult<usize> {
    Ok(matrix::l20_norm(&to_matrix(&x)?, tol))
}

#[pyfunction]
fn l21_norm(x: Rows) -> PyResult<f64> {
    Ok(matrix::l21_norm(&to_matrix(&x)?))
}

/// `‖A − B‖_F / √(rows · cols)`.
#[pyfunction]
fn rmse(a: Rows, b: Rows) -> PyResult<f64> {
    matrix::rmse(&to_matrix(&a)?, &to_matrix(&b)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (y, tol = DEFAULT_RANK_TOL))]
fn numeric_rank(y: Rows, tol: f64) -> PyResult<usize> {
    Ok(projection::numeric_rank(&to_matrix(&y)?, tol))
}

/// Largest row budget with a uniqueness guarantee for an `m`-row `Φ` and these measurements.
#[pyfunction]
fn sparsity_budget(m: usize, y: Rows) -> PyResult<usize> {
    Ok(projection::sparsity_budget(m, &to_matrix(&y)?).s)
}

#[pymodule]
fn jointsparse_py(module: &Bound<'_, PyModule>) -> PyResult<()> {
    module.add_class::<PyProblemInstance>()?;
    module.add_class::<PySolverResult>()?;
    module.add_function(wrap_pyfunction!(generate, module)?)?;
    module.add_function(wrap_pyfunction!(solve, module)?)?;
    module.add_function(wrap_pyfunction!(somp, module)?)?;
    module.add_function(wrap_pyfunction!(sniht, module)?)?;
    module.add_function(wrap_pyfunction!(admm_l21, module)?)?;
    module.add_function(wrap_pyfunction!(project_row_sparse, module)?)?;
    module.add_function(wrap_pyfunction!(row_norms, module)?)?;
    module.add_function(wrap_pyfunction!(l20_norm, module)?)?;
    module.add_function(wrap_pyfunction!(l21_norm, module)?)?;
    module.add_function(wrap_pyfunction!(rmse, module)?)?;
    module.add_function(wrap_pyfunction!(numeric_rank, module)?)?;
    module.add_function(wrap_pyfunction!(sparsity_budget, module)?)?;
    Ok(())
}
