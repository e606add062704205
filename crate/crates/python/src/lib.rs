//! Python bindings. Matrices are passed as nested lists; structured results
//! come back as plain dicts with the same layout as the CLI JSON reports.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::Serialize;

use coposolve::neumann::{self, Grid, SolveOutcome, SolverConfig};
use coposolve::p_copositivity::MuSearchBudget;
use coposolve::{ConeVector, Error, Exponent, ProblemParams, SolvabilityBudget, SymMatrix, Tolerance};

fn err(e: Error) -> PyErr {
    match e {
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(format!("{}: {e}", e.tag())),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn exponent(p: &Bound<'_, PyAny>) -> PyResult<Exponent> {
    let text = if let Ok(s) = p.cast::<PyString>() {
        s.to_str()?.to_owned()
    } else {
        let v: f64 = p.extract()?;
        format!("{v}")
    };
    text.parse().map_err(err)
}

/// Symmetric interaction matrix.
#[pyclass(frozen, module = "coposolve_py")]
pub struct Matrix {
    inner: SymMatrix,
}

#[pymethods]
impl Matrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        if rows.is_empty() || rows.len() > 16 {
            return Err(PyValueError::new_err("matrix size must be in 1..=16"));
        }
        Ok(Self {
            inner: SymMatrix::from_rows(&rows).map_err(err)?,
        })
    }

    #[staticmethod]
    fn b_epsilon(eps: f64) -> PyResult<Self> {
        Ok(Self {
            inner: coposolve::b_epsilon(eps).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn quadratic_form(&self, c: Vec<f64>) -> PyResult<f64> {
        Ok(coposolve::quadratic_form(&self.inner, &c).map_err(err)?.value)
    }

    fn p_form(&self, c: Vec<f64>, mu: Vec<f64>, p: f64) -> PyResult<f64> {
        let c = ConeVector::new(c).map_err(err)?;
        let mu = ConeVector::new(mu).map_err(err)?;
        Ok(coposolve::p_form(&self.inner, &c, &mu, p).map_err(err)?.value)
    }

    fn __repr__(&self) -> String {
        format!("Matrix({:?})", self.inner.rows())
    }
}

#[pyfunction]
#[pyo3(signature = (matrix, tol = 1e-9))]
fn classify<'py>(py: Python<'py>, matrix: &Matrix, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let tol = Tolerance::new(tol).map_err(err)?;
    to_py(py, &coposolve::classify_copositivity(&matrix.inner, tol).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (matrix, tol = 1e-9))]
fn psd<'py>(py: Python<'py>, matrix: &Matrix, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let tol = Tolerance::new(tol).map_err(err)?;
    to_py(py, &coposolve::check_psd(&matrix.inner, tol))
}

#[pyfunction]
#[pyo3(signature = (matrix, mu, p, resolution = 64))]
fn verify_mu<'py>(py: Python<'py>, matrix: &Matrix, mu: Vec<f64>, p: f64, resolution: u32) -> PyResult<Bound<'py, PyAny>> {
    let mu = ConeVector::new(mu).map_err(err)?;
    let out = py.detach(|| coposolve::verify_mu(&matrix.inner, &mu, p, resolution)).map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
#[pyo3(signature = (matrix, p, resolution = 64, budget = 50, seed = 0))]
fn find_mu<'py>(
    py: Python<'py>,
    matrix: &Matrix,
    p: f64,
    resolution: u32,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let budget = MuSearchBudget {
        max_iterations: budget,
        resolution,
        seed,
        ..MuSearchBudget::default()
    };
    let out = py.detach(|| coposolve::find_mu(&matrix.inner, p, &budget)).map_err(err)?;
    to_py(py, &out)
}

/// Existence verdict for nontrivial entire solutions. `p` may be a float or
/// an exact string such as `"10/3"`.
#[pyfunction]
#[pyo3(signature = (matrix, dim, p, resolution = 64, budget = 50, seed = 0, tol = 1e-9))]
#[allow(clippy::too_many_arguments)]
fn liouville<'py>(
    py: Python<'py>,
    matrix: &Matrix,
    dim: u32,
    p: &Bound<'py, PyAny>,
    resolution: u32,
    budget: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let params = ProblemParams::new(dim, exponent(p)?).map_err(err)?;
    let budget = SolvabilityBudget {
        search: MuSearchBudget {
            max_iterations: budget,
            resolution,
            seed,
            ..MuSearchBudget::default()
        },
        tolerance: Tolerance::new(tol).map_err(err)?,
    };
    let out = py
        .detach(|| coposolve::classify_solvability(&matrix.inner, &params, &budget))
        .map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
fn constant_solution<'py>(py: Python<'py>, matrix: &Matrix, p: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &coposolve::constant_solution(&matrix.inner, p).map_err(err)?)
}

/// Neumann problem on the unit interval or square. Returns the solver outcome
/// as a dict; on success `field` holds one list per component.
#[pyfunction]
#[pyo3(signature = (matrix, dim, p, nodes = 129))]
fn solve<'py>(py: Python<'py>, matrix: &Matrix, dim: u32, p: &Bound<'py, PyAny>, nodes: usize) -> PyResult<Bound<'py, PyAny>> {
    let params = ProblemParams::new(dim, exponent(p)?).map_err(err)?;
    let grid = Grid::unit(dim as usize, nodes).map_err(err)?;
    let out: SolveOutcome = py
        .detach(|| neumann::mountain_pass_solve(&matrix.inner, &params, &grid, &SolverConfig::default()))
        .map_err(err)?;
    to_py(py, &out)
}

#[pymodule]
fn coposolve_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Matrix>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(psd, m)?)?;
    m.add_function(wrap_pyfunction!(verify_mu, m)?)?;
    m.add_function(wrap_pyfunction!(find_mu, m)?)?;
    m.add_function(wrap_pyfunction!(liouville, m)?)?;
    m.add_function(wrap_pyfunction!(constant_solution, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
