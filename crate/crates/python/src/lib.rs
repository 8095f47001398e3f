//! Python module `wgfem`: meshes, single solves and convergence studies.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wg_core::geometry::{read_mesh, validate, write_mesh};
use wg_core::quadrature::{element_moments_about, gauss_rule};
use wg_core::{testcases, CaseKind, RunSettings, SolverOptions, Variant};

fn to_py(e: wg_core::Error) -> PyErr {
    match e {
        wg_core::Error::NotConverged(_) | wg_core::Error::NotSpd(_) | wg_core::Error::Conditioning { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_case(name: &str) -> PyResult<CaseKind> {
    CaseKind::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown case `{name}`")))
}

fn parse_variant(name: &str) -> PyResult<Variant> {
    match name {
        "curved" => Ok(Variant::Curved),
        "straight" => Ok(Variant::Straight),
        _ => Err(PyValueError::new_err(format!("unknown variant `{name}`"))),
    }
}

#[pyclass(name = "Mesh", module = "wgfem", frozen)]
struct PyMesh {
    inner: wg_core::Mesh,
}

#[pymethods]
impl PyMesh {
    /// Mesh of a registered case at a refinement level.
    #[staticmethod]
    #[pyo3(signature = (case, level, variant = "curved"))]
    fn generate(case: &str, level: usize, variant: &str) -> PyResult<Self> {
        let inner = parse_case(case)?.mesh(level, parse_variant(variant)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn unit_square(n: usize) -> Self {
        Self {
            inner: testcases::square_mesh(n),
        }
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: read_mesh(path).map_err(to_py)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        write_mesh(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.elements.len()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.edges.len()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn area(&self) -> f64 {
        self.inner.total_area()
    }

    #[getter]
    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices.iter().map(|p| (p.x, p.y)).collect()
    }

    /// Regularity summary; raises `ValueError` listing defects.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = validate(&self.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("elements", r.elements)?;
        d.set_item("edges", r.edges)?;
        d.set_item("boundary_edges", r.boundary_edges)?;
        d.set_item("min_area_ratio", r.min_area_ratio)?;
        d.set_item("min_edge_ratio", r.min_edge_ratio)?;
        d.set_item("max_edge_ratio", r.max_edge_ratio)?;
        d.set_item("h", r.h)?;
        Ok(d)
    }

    /// `[(a, b, int x^a y^b)]` over one element, `a + b <= degree`.
    fn moments(&self, element: usize, degree: usize) -> PyResult<Vec<(usize, usize, f64)>> {
        let el = self
            .inner
            .elements
            .get(element)
            .ok_or_else(|| PyValueError::new_err(format!("no element {element}")))?;
        let t = element_moments_about(el, &self.inner, degree, wg_core::Point2::default(), 1.0);
        Ok(t.iter().collect())
    }

    fn __repr__(&self) -> String {
        format!("Mesh(elements={}, edges={}, h={:.4})", self.inner.elements.len(), self.inner.edges.len(), self.inner.h)
    }
}

#[pyclass(name = "Solution", module = "wgfem", frozen)]
struct PySolution {
    outcome: wg_core::SolveOutcome,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn dofs(&self) -> usize {
        self.outcome.system.free()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.outcome.report.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.outcome.report.residual
    }

    /// `energy`, `l2`, `eb`, `h1` errors against the projected exact solution.
    fn errors<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let e = self.outcome.errors;
        let d = PyDict::new(py);
        d.set_item("energy", e.energy)?;
        d.set_item("l2", e.l2_interior)?;
        d.set_item("eb", e.l2_edge)?;
        d.set_item("h1", e.h1_broken)?;
        Ok(d)
    }

    /// Global WG coefficient vector.
    fn coefficients(&self) -> Vec<f64> {
        self.outcome.solution.coeffs.clone()
    }

    /// `x,y,u0` sample CSV, 25 points per element.
    fn samples_csv(&self) -> String {
        wg_core::cli::solution_samples(&self.outcome)
    }

    #[getter]
    fn mesh(&self) -> PyMesh {
        PyMesh {
            inner: self.outcome.mesh.clone(),
        }
    }
}

fn settings(case: &str, variant: &str, order: usize, rho: f64, tol: f64, maxiter: Option<usize>) -> PyResult<RunSettings> {
    if !(1..=3).contains(&order) {
        return Err(PyValueError::new_err(format!("order {order} outside 1..=3")));
    }
    Ok(RunSettings {
        case: parse_case(case)?,
        variant: parse_variant(variant)?,
        order,
        rho,
        solver: SolverOptions {
            tol,
            maxiter,
            ..Default::default()
        },
    })
}

/// Solves a registered case at one level.
#[pyfunction]
#[pyo3(signature = (case, level, order, variant = "curved", rho = 1.0, tol = 1e-12, maxiter = None))]
fn solve(py: Python<'_>, case: &str, level: usize, order: usize, variant: &str, rho: f64, tol: f64, maxiter: Option<usize>) -> PyResult<PySolution> {
    let s = settings(case, variant, order, rho, tol, maxiter)?;
    let (_, outcome) = py.detach(|| wg_core::run_level(&s, level)).map_err(to_py)?;
    Ok(PySolution { outcome })
}

/// Convergence table as CSV text.
#[pyfunction]
#[pyo3(signature = (case, levels, order, variant = "curved", rho = 1.0, tol = 1e-12))]
fn study(py: Python<'_>, case: &str, levels: Vec<usize>, order: usize, variant: &str, rho: f64, tol: f64) -> PyResult<String> {
    let s = settings(case, variant, order, rho, tol, None)?;
    let report = py.detach(|| wg_core::run_study(&s, &levels)).map_err(to_py)?;
    Ok(report.to_csv())
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
#[pyfunction]
fn gauss_legendre(n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let g = gauss_rule(n).map_err(to_py)?;
    Ok((g.nodes.clone(), g.weights.clone()))
}

#[pymodule]
fn wgfem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(study, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_legendre, m)?)?;
    Ok(())
}
