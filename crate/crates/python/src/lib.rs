use epsfree_core::bounds::{report, ReportOptions, Variant};
use epsfree_core::certify::{certify, CertifyOptions};
use epsfree_core::coefficients::MatrixCoefficients;
use epsfree_core::estimator::{self, Budget};
use epsfree_core::moments;
use epsfree_core::tensor;
use epsfree_core::{Error, Family, TraceMonoid};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BasisTooLarge { .. } | Error::SizeLimitExceeded { .. } => PyMemoryError::new_err(e.to_string()),
        Error::NoConvergence { .. } | Error::SolverFailure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn record<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Commutation graph; adjacent letters commute. Vertices are 0-based.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: epsfree_core::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(d: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph { inner: epsfree_core::Graph::from_edges(d, &edges).map_err(to_py)? })
    }

    /// Named family, e.g. `Graph.family("xy_model", [6])`.
    #[staticmethod]
    #[pyo3(signature = (name, params, seed=None))]
    fn family(name: &str, params: Vec<String>, seed: Option<u64>) -> PyResult<Self> {
        let g = Family::from_parts(name, &params).and_then(|f| f.generate(seed)).map_err(to_py)?;
        Ok(PyGraph { inner: g })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: epsfree_core::Graph::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn spectrum(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.spectrum().map_err(to_py)?.eigenvalues)
    }

    /// `(omega, witness)`
    fn clique(&self) -> PyResult<(usize, Vec<usize>)> {
        let c = self.inner.clique_number().map_err(to_py)?;
        Ok((c.omega, c.witness))
    }

    fn normal_form(&self, word: Vec<usize>) -> PyResult<Vec<usize>> {
        Ok(TraceMonoid::new(&self.inner).normal_form(&word).map_err(to_py)?.to_word())
    }

    fn trace_counts(&self, max_len: usize) -> PyResult<Vec<usize>> {
        Ok(epsfree_core::trace::enumerate_traces(&self.inner, max_len).map_err(to_py)?.counts())
    }

    fn vacuum_moment(&self, word: Vec<usize>) -> PyResult<BigInt> {
        moments::vacuum_moment(&self.inner, &word).map_err(to_py)
    }

    fn sum_moments(&self, order: usize) -> PyResult<Vec<BigInt>> {
        Ok(moments::sum_moments(&self.inner, order).map_err(to_py)?.values)
    }

    #[pyo3(signature = (depth, tol=1e-10))]
    fn truncated_norm(&self, depth: usize, tol: f64) -> PyResult<f64> {
        Ok(estimator::truncated_norm(&self.inner, depth, tol).map_err(to_py)?.value)
    }

    fn clique_vector_bound(&self, clique: Vec<usize>, n: u64) -> PyResult<f64> {
        Ok(estimator::clique_vector_bound(&self.inner, &clique, n).map_err(to_py)?.value)
    }

    /// Closed-form bounds as a dict; `depth` attaches the best numerical
    /// lower bound.
    #[pyo3(signature = (depth=None))]
    fn bounds<'py>(&self, py: Python<'py>, depth: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let numerics = depth.map(|max_depth| Budget { max_depth, ..Budget::default() });
        record(py, &report(&self.inner, &ReportOptions { numerics }).map_err(to_py)?)
    }

    /// `matrices[i][r][c]` is entry `(r, c)` of `a_i`, real or complex.
    #[pyo3(signature = (matrices, depth=8, variant="eigen"))]
    fn khintchine<'py>(
        &self,
        py: Python<'py>,
        matrices: Vec<Vec<Vec<Complex64>>>,
        depth: usize,
        variant: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let k = matrices.first().map_or(0, Vec::len);
        let mats = matrices
            .iter()
            .map(|m| {
                if m.len() != k || m.iter().any(|row| row.len() != k) {
                    return Err(PyValueError::new_err(format!("every matrix must be {k}x{k}")));
                }
                Ok(nalgebra_matrix(k, m))
            })
            .collect::<PyResult<Vec<_>>>()?;
        let c = MatrixCoefficients::new(k, mats).map_err(to_py)?;
        let variant: Variant = variant.parse().map_err(to_py)?;
        record(py, &tensor::khintchine_check(&c, &self.inner, depth, variant).map_err(to_py)?)
    }

    /// Runs the invariant suite; the dict carries one entry per check.
    fn certify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        record(py, &certify(&self.inner, &CertifyOptions::default()).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("Graph(d={}, edges={:?})", self.inner.d(), self.inner.edges())
    }
}

fn nalgebra_matrix(k: usize, rows: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    DMatrix::from_fn(k, k, |r, c| rows[r][c])
}

#[pymodule]
fn epsfree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
