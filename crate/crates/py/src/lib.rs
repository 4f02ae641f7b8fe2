//! Python bindings for the `nls4` core crate.

#![allow(clippy::useless_conversion)]

use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use nls4::evolve::{conserved_quantities, duhamel_residual, evolve, EvolveConfig, InitialData};
use nls4::grid::MAX_DIM;
use nls4::lp::{lp_project, Band};
use nls4::morawetz::im4_report;
use nls4::scale::{build_n1, default_delta, smooth, ScaleFunction};
use nls4::verify::acceptance;
use nls4::weight::{certify_derivative_bounds, WeightProfile};

fn err(e: nls4::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn padded(v: Option<Vec<f64>>, d: usize) -> PyResult<[f64; MAX_DIM]> {
    let mut out = [0.0; MAX_DIM];
    if let Some(v) = v {
        if v.len() != d {
            return Err(PyValueError::new_err(format!("expected {d} components, got {}", v.len())));
        }
        out[..d].copy_from_slice(&v);
    }
    Ok(out)
}

#[pyclass(name = "Grid", frozen)]
#[derive(Clone, Copy)]
struct PyGrid(nls4::GridSpec);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(d: usize, n: usize, half_len: f64) -> PyResult<Self> {
        nls4::GridSpec::new(d, n, half_len).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn half_len(&self) -> f64 {
        self.0.half_len()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid(d={}, n={}, half_len={})", self.0.dim(), self.0.n(), self.0.half_len())
    }
}

#[pyclass(name = "Field")]
#[derive(Clone)]
struct PyField(nls4::ComplexField);

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (grid, values, t = 0.0))]
    fn new(grid: PyGrid, values: Vec<Complex64>, t: f64) -> PyResult<Self> {
        nls4::ComplexField::new(grid.0, t, values).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (grid, amplitude, width, center = None, velocity = None))]
    fn gaussian(
        grid: PyGrid,
        amplitude: f64,
        width: f64,
        center: Option<Vec<f64>>,
        velocity: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let d = grid.0.dim();
        let init = InitialData::Gaussian {
            amplitude,
            center: padded(center, d)?,
            width,
            velocity: padded(velocity, d)?,
        };
        init.build(&grid.0).map(Self).map_err(err)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t()
    }

    fn values(&self) -> Vec<Complex64> {
        self.0.values().to_vec()
    }

    fn mass(&self) -> f64 {
        self.0.mass()
    }

    #[pyo3(signature = (mu = 1.0, p = 4))]
    fn energy(&self, mu: f64, p: u32) -> f64 {
        conserved_quantities(&self.0, mu, p).1
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn lp_norm(&self, p: f64) -> f64 {
        self.0.lp_norm(p)
    }

    /// `kind` is one of `"at_most"`, `"at"`, `"above"`, `"range"` (the last needs `n_hi`).
    #[pyo3(signature = (kind, n, n_hi = None))]
    fn project(&self, kind: &str, n: f64, n_hi: Option<f64>) -> PyResult<Self> {
        let band = match (kind, n_hi) {
            ("at_most", None) => Band::AtMost(n),
            ("at", None) => Band::At(n),
            ("above", None) => Band::Above(n),
            ("range", Some(b)) => Band::Range(n, b),
            _ => return Err(PyValueError::new_err(format!("bad band '{kind}'"))),
        };
        lp_project(&self.0, band).map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Field(t={}, mass={:.6e})", self.0.t(), self.0.mass())
    }
}

#[pyclass(name = "Trajectory")]
struct PyTrajectory(nls4::evolve::Trajectory);

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, i: isize) -> PyResult<PyField> {
        let len = self.0.len() as isize;
        let j = if i < 0 { i + len } else { i };
        if !(0..len).contains(&j) {
            return Err(PyIndexError::new_err("sample index out of range"));
        }
        Ok(PyField(self.0.samples()[j as usize].clone()))
    }

    fn times(&self) -> Vec<f64> {
        self.0.times()
    }

    fn mass_drift(&self) -> f64 {
        self.0.mass_drift()
    }

    fn energy_drift(&self) -> f64 {
        self.0.energy_drift()
    }

    fn duhamel_residual(&self) -> PyResult<f64> {
        duhamel_residual(&self.0).map_err(err)
    }

    /// `(lhs, rhs)` of the interaction Morawetz bound.
    fn im4(&self) -> PyResult<(f64, f64)> {
        im4_report(&self.0).map(|r| (r.lhs, r.rhs)).map_err(err)
    }
}

#[pyfunction(name = "evolve")]
#[pyo3(signature = (initial, t_end, dt = 1e-3, sample_every = 10, mu = 1.0, p = 4))]
fn py_evolve(initial: &PyField, t_end: f64, dt: f64, sample_every: usize, mu: f64, p: u32) -> PyResult<PyTrajectory> {
    let grid = *initial.0.grid();
    let mut cfg = EvolveConfig::new(grid, InitialData::Field(initial.0.clone()));
    cfg.t_end = t_end;
    cfg.dt = dt;
    cfg.sample_every = sample_every;
    cfg.mu = mu;
    cfg.p = p;
    evolve(&cfg).map(PyTrajectory).map_err(err)
}

#[pyclass(name = "WeightProfile", frozen)]
struct PyWeight(WeightProfile);

#[pymethods]
impl PyWeight {
    #[new]
    #[pyo3(signature = (r, j))]
    fn new(r: f64, j: u32) -> PyResult<Self> {
        WeightProfile::new(r, j).map(Self).map_err(err)
    }

    fn w(&self, r: f64) -> f64 {
        self.0.w(r)
    }

    fn w_r(&self, r: f64) -> f64 {
        self.0.w_r(r)
    }

    #[getter]
    fn outer_radius(&self) -> f64 {
        self.0.outer_radius()
    }

    /// `sup J r^k |d_r^k w_r|` over the certifier sample.
    fn certify(&self, k: usize) -> PyResult<f64> {
        certify_derivative_bounds(&self.0, k).map_err(err)
    }
}

#[pyclass(name = "ScaleFunction", frozen)]
struct PyScale(ScaleFunction);

#[pymethods]
impl PyScale {
    /// `kind` is `"piecewise-constant"` or `"piecewise-linear"`.
    #[new]
    fn new(kind: &str, breakpoints: Vec<f64>, values: Vec<f64>, end: f64) -> PyResult<Self> {
        let kind = nls4::scale::ScaleKind::parse(kind).map_err(err)?;
        ScaleFunction::new(kind, breakpoints, values, end).map(Self).map_err(err)
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.0.eval(t).map_err(err)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints().to_vec()
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[pyo3(signature = (delta = None))]
    fn build_n1(&self, delta: Option<f64>) -> PyResult<Self> {
        let delta = match delta {
            Some(d) => d,
            None => default_delta(&self.0).map_err(err)?,
        };
        build_n1(&self.0, delta).map(Self).map_err(err)
    }

    fn smooth(&self, m: usize) -> PyResult<Self> {
        smooth(&self.0, m).map(Self).map_err(err)
    }
}

/// Runs one acceptance criterion; returns `(passed, report line)`.
#[pyfunction]
fn check(id: usize) -> PyResult<(bool, String)> {
    if !(1..=acceptance::CRITERIA).contains(&id) {
        return Err(PyValueError::new_err(format!("criterion {id} outside 1..={}", acceptance::CRITERIA)));
    }
    let r = acceptance::run(id);
    Ok((r.passed, r.to_string()))
}

#[pymodule]
#[pyo3(name = "nls4")]
fn nls4_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyWeight>()?;
    m.add_class::<PyScale>()?;
    m.add_function(wrap_pyfunction!(py_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
