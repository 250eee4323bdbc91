//! Python bindings. Matrices go in as nested lists (row-major); every result
//! comes back as the same dict the CLI prints with `--json`.

use psdpencil::oracle::{plant_instance as plant, scan_interval as scan, PlantKind};
use psdpencil::{Error, GtrsInstance, SolveOptions, SymMatrix, Tolerances};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(
    psdpencil_py,
    AmbiguousError,
    PyArithmeticError,
    "A tolerance-dependent verdict fell inside the ambiguity band."
);
create_exception!(
    psdpencil_py,
    ConvergenceError,
    PyArithmeticError,
    "An iteration cap was hit or a numerical kernel failed."
);

fn err(e: Error) -> PyErr {
    match e {
        Error::Ambiguous { .. } => AmbiguousError::new_err(e.to_string()),
        Error::Convergence { .. } | Error::Numerical(_) => ConvergenceError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<SymMatrix> {
    SymMatrix::from_rows(&rows).map_err(err)
}

fn tolerances(tol: f64) -> PyResult<Tolerances> {
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(PyValueError::new_err(format!(
            "tol must lie in (0, 1), got {tol}"
        )));
    }
    Ok(Tolerances::from_base(tol))
}

fn instance(
    a_mat: Vec<Vec<f64>>,
    b_mat: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
) -> PyResult<GtrsInstance> {
    GtrsInstance::new(matrix(a_mat)?, matrix(b_mat)?, a.into(), b.into(), c).map_err(err)
}

/// Closed set of `μ` with `A + μB ⪰ 0`, plus diagnostics.
#[pyfunction]
#[pyo3(signature = (a, b, tol = 1e-9))]
fn psd_interval(
    py: Python<'_>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let r = psdpencil::psd_interval(&matrix(a)?, &matrix(b)?, &tolerances(tol)?).map_err(err)?;
    to_py(py, &r)
}

/// Simultaneous diagonalizability by congruence.
#[pyfunction]
#[pyo3(signature = (a, b, tol = 1e-9))]
fn is_sdc(py: Python<'_>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, tol: f64) -> PyResult<Py<PyAny>> {
    let r = psdpencil::is_sdc(&matrix(a)?, &matrix(b)?, &tolerances(tol)?).map_err(err)?;
    to_py(py, &r)
}

/// `min xᵀAx + 2aᵀx  s.t.  xᵀBx + 2bᵀx + c ≤ 0`.
#[pyfunction]
#[pyo3(signature = (a_mat, b_mat, a, b, c, tol = 1e-9, tol_mu = 1e-10, tol_g = 1e-9, max_iter = 200))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    a_mat: Vec<Vec<f64>>,
    b_mat: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
    tol: f64,
    tol_mu: f64,
    tol_g: f64,
    max_iter: usize,
) -> PyResult<Py<PyAny>> {
    let inst = instance(a_mat, b_mat, a, b, c)?;
    let opts = SolveOptions {
        tol: tolerances(tol)?,
        tol_mu,
        tol_g,
        max_iter,
        ..SolveOptions::default()
    };
    let out = py.detach(|| psdpencil::solve(&inst, &opts)).map_err(err)?;
    to_py(py, &out)
}

/// KKT residuals of a candidate `(x, μ)`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn check_kkt(
    py: Python<'_>,
    a_mat: Vec<Vec<f64>>,
    b_mat: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
    x: Vec<f64>,
    mu: f64,
) -> PyResult<Py<PyAny>> {
    let inst = instance(a_mat, b_mat, a, b, c)?;
    if x.len() != inst.dim() {
        return Err(PyValueError::new_err(format!(
            "x has {} entries, expected {}",
            x.len(),
            inst.dim()
        )));
    }
    to_py(py, &psdpencil::check_kkt(&inst, &x.into(), mu))
}

/// Seeded instance with a known solution; `kind` is one of `interior_mu`,
/// `boundary_mu`, `singleton_mu`, `reducible_singular`, `unbounded`.
#[pyfunction]
#[pyo3(signature = (seed, n, kind = "interior_mu"))]
fn plant_instance(py: Python<'_>, seed: u64, n: usize, kind: &str) -> PyResult<Py<PyAny>> {
    let kind: PlantKind = kind.parse().map_err(|e: String| PyValueError::new_err(e))?;
    if n == 0 {
        return Err(PyValueError::new_err("n must be at least 1"));
    }
    to_py(py, &plant(seed, n, kind))
}

/// Brute-force `λ_min(A + μB)` on a uniform grid.
#[pyfunction]
#[pyo3(signature = (a, b, lo = -5.0, hi = 5.0, steps = 101, tol = 1e-9))]
fn scan_interval(
    py: Python<'_>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let (a, b) = (matrix(a)?, matrix(b)?);
    let r = py
        .detach(|| scan(&a, &b, lo, hi, steps, tol))
        .map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
fn psdpencil_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AmbiguousError", m.py().get_type::<AmbiguousError>())?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_function(wrap_pyfunction!(psd_interval, m)?)?;
    m.add_function(wrap_pyfunction!(is_sdc, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(check_kkt, m)?)?;
    m.add_function(wrap_pyfunction!(plant_instance, m)?)?;
    m.add_function(wrap_pyfunction!(scan_interval, m)?)?;
    Ok(())
}
