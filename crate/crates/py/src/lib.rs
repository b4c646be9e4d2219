//! Python bindings. Reports cross the boundary as plain dicts and lists
//! built from their JSON form.

use std::time::Duration;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use pcx_core::arith;
use pcx_core::conj2;
use pcx_core::goodsets;
use pcx_core::scanner;
use pcx_core::search::{self, Budget, RangeMode};
use pcx_core::sets::{self, Admissibility, CandidateSet};
use pcx_core::tables;
use pcx_core::theorems;
use pcx_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Internal(_) | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn report<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

fn budget(budget_ms: Option<u64>, budget_nodes: Option<u64>) -> Budget {
    let mut b = Budget::default();
    if let Some(ms) = budget_ms {
        b.max_time = Duration::from_millis(ms);
    }
    if let Some(nodes) = budget_nodes {
        b.max_nodes = nodes;
    }
    b
}

/// The first `k + 2` primes and the primorial of the first `k`.
#[pyclass(name = "PrimeBasis", frozen)]
struct PyPrimeBasis {
    inner: arith::PrimeBasis,
}

#[pymethods]
impl PyPrimeBasis {
    #[new]
    fn new(k: usize) -> PyResult<Self> {
        Ok(PyPrimeBasis { inner: arith::PrimeBasis::new(k).map_err(py_err)? })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn primes(&self) -> Vec<i64> {
        self.inner.primes().to_vec()
    }

    #[getter]
    fn primorial(&self) -> i64 {
        self.inner.primorial()
    }

    fn in_f_k(&self, m: i64) -> bool {
        self.inner.in_f_k(m)
    }

    fn count_e(&self, n: i64) -> i64 {
        self.inner.count_e(n)
    }

    fn e_set(&self, n: i64) -> Vec<i64> {
        self.inner.e_set(n)
    }

    fn t_k(&self) -> Vec<i64> {
        self.inner.t_k()
    }

    fn in_t_k(&self, a: i64) -> bool {
        self.inner.in_t_k(a)
    }

    fn __repr__(&self) -> String {
        format!("PrimeBasis(k={})", self.inner.k())
    }
}

/// `(True, None)` when no `k + 1` members are pairwise coprime, otherwise
/// `(False, witness)` with the lexicographically least witness.
#[pyfunction]
fn is_admissible(elements: Vec<i64>, k: usize) -> PyResult<(bool, Option<Vec<i64>>)> {
    let lo = elements.iter().copied().min().unwrap_or(1);
    let hi = elements.iter().copied().max().unwrap_or(1);
    let window = arith::Window::new(lo, hi).map_err(py_err)?;
    let set = CandidateSet::new(window, elements).map_err(py_err)?;
    Ok(match sets::is_admissible(&set, k) {
        Admissibility::Admissible => (true, None),
        Admissibility::Witness(w) => (false, Some(w.elements)),
    })
}

#[pyfunction]
fn is_good_set<'py>(py: Python<'py>, k: usize, elements: Vec<i64>) -> PyResult<Bound<'py, PyAny>> {
    let basis = arith::PrimeBasis::new(k).map_err(py_err)?;
    report(py, &goodsets::is_good_set(&basis, &elements))
}

#[pyfunction]
#[pyo3(signature = (n, k, enumerate = false, cap = search::DEFAULT_CAP, budget_ms = None, budget_nodes = None))]
fn exact_f<'py>(
    py: Python<'py>,
    n: i64,
    k: usize,
    enumerate: bool,
    cap: usize,
    budget_ms: Option<u64>,
    budget_nodes: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let b = budget(budget_ms, budget_nodes);
    let outcome = py.detach(|| search::exact_f(n, k, b, enumerate, cap)).map_err(py_err)?;
    report(py, &outcome)
}

#[pyfunction]
#[pyo3(signature = (k, n_from, n_to, mode = "value", budget_ms = None, budget_nodes = None))]
fn check_range<'py>(
    py: Python<'py>,
    k: usize,
    n_from: i64,
    n_to: i64,
    mode: &str,
    budget_ms: Option<u64>,
    budget_nodes: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = match mode {
        "value" => RangeMode::Value,
        "uniqueness" => RangeMode::Uniqueness,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let b = budget(budget_ms, budget_nodes);
    let r = py.detach(|| search::check_range(k, n_from, n_to, mode, b)).map_err(py_err)?;
    report(py, &r)
}

#[pyfunction]
fn builtin_table<'py>(py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyAny>> {
    report(py, &tables::builtin_table(k).map_err(py_err)?)
}

/// Certificate for the built-in table, or for the table at `table_path`.
#[pyfunction]
#[pyo3(signature = (k, table_path = None))]
fn verify_conjecture2<'py>(py: Python<'py>, k: usize, table_path: Option<String>) -> PyResult<Bound<'py, PyAny>> {
    let basis = arith::PrimeBasis::new(k).map_err(py_err)?;
    let table = match table_path {
        Some(p) => tables::load_table(p),
        None => tables::builtin_table(k),
    }
    .map_err(py_err)?;
    let cert = conj2::verify_conjecture2(&basis, &table).map_err(py_err)?;
    report(py, &cert)
}

#[pyfunction]
fn verify_counting<'py>(py: Python<'py>, k: usize, n: i64) -> PyResult<Bound<'py, PyAny>> {
    let scheme = theorems::builtin_scheme(k).map_err(py_err)?;
    report(py, &theorems::verify_counting(&scheme, n))
}

#[pyfunction]
fn verify_uniqueness_chain_k4<'py>(py: Python<'py>, n: i64) -> PyResult<Bound<'py, PyAny>> {
    report(py, &theorems::verify_uniqueness_chain_k4(n).map_err(py_err)?)
}

#[pyfunction]
fn remark_counterexample<'py>(py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let basis = arith::PrimeBasis::new(k).map_err(py_err)?;
    report(py, &theorems::remark_counterexample(&basis).map_err(py_err)?)
}

/// Runs the full pipeline for theorem 1 (k = 3) or theorem 2 (k = 4).
#[pyfunction]
fn verify_theorem<'py>(py: Python<'py>, which: u8) -> PyResult<Bound<'py, PyAny>> {
    let run = py
        .detach(|| match which {
            1 => theorems::theorem1(Budget::default()),
            2 => theorems::theorem2(Budget::default()),
            _ => Err(Error::OutOfRange { n: which as i64, lo: 1, hi: 2 }),
        })
        .map_err(py_err)?;
    report(py, &run)
}

#[pyfunction]
fn scan_h<'py>(py: Python<'py>, t_max: usize) -> PyResult<Bound<'py, PyAny>> {
    report(py, &scanner::scan_h(t_max))
}

#[pymodule]
fn pcx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPrimeBasis>()?;
    m.add_function(wrap_pyfunction!(is_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(is_good_set, m)?)?;
    m.add_function(wrap_pyfunction!(exact_f, m)?)?;
    m.add_function(wrap_pyfunction!(check_range, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_table, m)?)?;
    m.add_function(wrap_pyfunction!(verify_conjecture2, m)?)?;
    m.add_function(wrap_pyfunction!(verify_counting, m)?)?;
    m.add_function(wrap_pyfunction!(verify_uniqueness_chain_k4, m)?)?;
    m.add_function(wrap_pyfunction!(remark_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(scan_h, m)?)?;
    Ok(())
}
