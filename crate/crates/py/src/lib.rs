//! Python bindings. Results cross the boundary as plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use eigenclose_core::assembly::assemble as assemble_core;
use eigenclose_core::bounds::{lower_bounds as lower_core, upper_bound_higher, upper_bound_lowest};
use eigenclose_core::report::{self, ExperimentConfig, Format, PostKinds};
use eigenclose_core::solve::{EigOptions, DEFAULT_SEED, DEFAULT_TOL};
use eigenclose_core::elements::ALL_KINDS;
use eigenclose_core::{build_mesh, refine_uniform, CellKind, DomainKind, ElementKind};

create_exception!(eigenclose, EigencloseError, PyException);

fn err(e: eigenclose_core::Error) -> PyErr {
    EigencloseError::new_err(e.to_string())
}

fn bad(msg: String) -> PyErr {
    EigencloseError::new_err(msg)
}

fn domain_of(s: &str) -> PyResult<DomainKind> {
    match s.to_ascii_lowercase().as_str() {
        "square" | "unit_square" => Ok(DomainKind::UnitSquare),
        "lshape" | "l_shape" => Ok(DomainKind::LShape),
        _ => Err(bad(format!("unknown domain {s:?}"))),
    }
}

fn cell_of(s: &str) -> PyResult<CellKind> {
    match s.to_ascii_lowercase().as_str() {
        "triangle" => Ok(CellKind::Triangle),
        "rectangle" => Ok(CellKind::Rectangle),
        _ => Err(bad(format!("unknown cell kind {s:?}"))),
    }
}

fn element_of(s: &str) -> PyResult<ElementKind> {
    ElementKind::parse(s).ok_or_else(|| bad(format!("unknown element {s:?}")))
}

// serde -> json -> python; keeps the dict layout identical to the JSON output
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| bad(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn options(tol: f64, seed: u64) -> EigOptions {
    EigOptions {
        tol,
        seed,
        ..EigOptions::default()
    }
}

/// Uniform mesh of the unit square or the L-shape.
#[pyclass(name = "Mesh", module = "eigenclose", frozen)]
struct PyMesh {
    inner: eigenclose_core::Mesh,
}

#[pymethods]
impl PyMesh {
    #[new]
    #[pyo3(signature = (domain, cell, n))]
    fn new(domain: &str, cell: &str, n: usize) -> PyResult<Self> {
        let inner = build_mesh(domain_of(domain)?, cell_of(cell)?, n).map_err(err)?;
        Ok(PyMesh { inner })
    }

    #[getter]
    fn domain(&self) -> &'static str {
        self.inner.domain().name()
    }

    #[getter]
    fn cell(&self) -> &'static str {
        self.inner.cell_kind().name()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.subdivisions()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.inner.num_cells()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes().iter().map(|p| (p[0], p[1])).collect()
    }

    fn cells(&self) -> Vec<Vec<usize>> {
        (0..self.inner.num_cells()).map(|c| self.inner.cell(c).to_vec()).collect()
    }

    fn refine(&self) -> PyMesh {
        PyMesh {
            inner: refine_uniform(&self.inner),
        }
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(domain={:?}, cell={:?}, n={})",
            self.domain(),
            self.cell(),
            self.n()
        )
    }
}

/// Names accepted wherever an element is expected.
#[pyfunction]
fn element_kinds() -> Vec<&'static str> {
    ALL_KINDS.iter().map(|k| k.name()).collect()
}

/// Stiffness and mass over the free DOFs, as upper-triangle COO triplets.
#[pyfunction]
fn assemble<'py>(py: Python<'py>, mesh: &PyMesh, element: &str) -> PyResult<Bound<'py, PyDict>> {
    let asm = assemble_core(&mesh.inner, element_of(element)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("dim", asm.a.dim())?;
    d.set_item("a", asm.a.upper_entries().collect::<Vec<_>>())?;
    d.set_item("b", asm.b.upper_entries().collect::<Vec<_>>())?;
    Ok(d)
}

/// Smallest `m` discrete eigenpairs of a nonconforming element.
#[pyfunction]
#[pyo3(signature = (mesh, element, m, tol = DEFAULT_TOL, seed = DEFAULT_SEED))]
fn lower_bounds<'py>(
    py: Python<'py>,
    mesh: &PyMesh,
    element: &str,
    m: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let res = py
        .detach(|| lower_core(&mesh.inner, element_of(element)?, m, &options(tol, seed)).map_err(err))?;
    to_py(py, &res)
}

/// Lower bounds with both postprocessed upper bounds at one mesh level.
#[pyfunction]
#[pyo3(signature = (mesh, element, m, subspace = None, tol = DEFAULT_TOL, seed = DEFAULT_SEED))]
fn upper_bounds<'py>(
    py: Python<'py>,
    mesh: &PyMesh,
    element: &str,
    m: usize,
    subspace: Option<usize>,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = element_of(element)?;
    let s = subspace.unwrap_or(m).max(m);
    let (nc, low, high) = py.detach(|| -> PyResult<_> {
        let nc = lower_core(&mesh.inner, kind, s, &options(tol, seed)).map_err(err)?;
        let mut first = nc.clone();
        first.eigenvalues.truncate(m);
        first.eigenvectors.truncate(m);
        first.residuals.truncate(m);
        let low = upper_bound_lowest(&first, kind.lowest_conforming(), &mesh.inner).map_err(err)?;
        let high = upper_bound_higher(&nc, kind.higher_conforming(), &mesh.inner, s).map_err(err)?;
        Ok((first, low, high))
    })?;
    let d = PyDict::new(py);
    d.set_item("lower", nc.eigenvalues)?;
    d.set_item("upper_lowest", low.values)?;
    d.set_item("upper_higher", high.values.into_iter().take(m).collect::<Vec<_>>())?;
    d.set_item("reduced_dim", high.reduced_dim)?;
    Ok(d)
}

/// Refinement sweep; returns the same structure as the JSON output.
#[pyfunction]
#[pyo3(signature = (domain, element, levels, m = 6, subspace = None, post = "both", tol = DEFAULT_TOL, seed = DEFAULT_SEED))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    domain: &str,
    element: &str,
    levels: Vec<usize>,
    m: usize,
    subspace: Option<usize>,
    post: &str,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let config = ExperimentConfig {
        domain: domain_of(domain)?,
        nc_kind: element_of(element)?,
        post: PostKinds::parse(post).ok_or_else(|| bad(format!("unknown post {post:?}")))?,
        levels,
        m,
        subspace,
        tol,
        seed,
    };
    let bundle = py.detach(|| report::run_experiment(&config).map_err(err))?;
    to_py(py, &bundle)
}

/// Renders a sweep result (as returned by `run_experiment`) as csv, markdown or json.
#[pyfunction]
fn render(py: Python<'_>, bundle: &Bound<'_, PyAny>, format: &str) -> PyResult<String> {
    let fmt = Format::parse(format).ok_or_else(|| bad(format!("unknown format {format:?}")))?;
    let text: String = py.import("json")?.call_method1("dumps", (bundle,))?.extract()?;
    let bundle = report::parse_json(&text).map_err(err)?;
    report::render(&bundle, fmt).map_err(err)
}

/// Least-squares convergence rate of `errors` against mesh sizes `hs`.
#[pyfunction]
fn fit_rate(errors: Vec<f64>, hs: Vec<f64>) -> Option<f64> {
    report::fit_rate(&errors, &hs)
}

#[pymodule]
fn eigenclose(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EigencloseError", m.py().get_type::<EigencloseError>())?;
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(element_kinds, m)?)?;
    m.add_function(wrap_pyfunction!(assemble, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(upper_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    Ok(())
}
