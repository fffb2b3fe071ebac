//! Python bindings. Structured results come back as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use fibtrace::dimension::{self, EpsGrid};
use fibtrace::hyperbolic::{
    self, CertifyParams, ConeSpec3D, EmpiricalParams, ModelMapSpec, RecurrenceParams, DEFAULT_N_REF,
};
use fibtrace::subshift::SubshiftSpec;
use fibtrace::{geometry, spectrum, torus, Coupling};

fn err(e: fibtrace::Error) -> PyErr {
    match e {
        fibtrace::Error::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

fn coupling(v: f64) -> PyResult<Coupling> {
    Coupling::new(v).map_err(err)
}

#[pyclass(name = "Point3", module = "pyfibtrace", from_py_object)]
#[derive(Clone, Copy)]
struct PyPoint3(fibtrace::Point3);

#[pymethods]
impl PyPoint3 {
    #[new]
    fn new(x: f64, y: f64, z: f64) -> PyResult<Self> {
        fibtrace::Point3::try_new(x, y, z).map(PyPoint3).map_err(err)
    }

    #[getter]
    fn x(&self) -> f64 {
        self.0.x
    }

    #[getter]
    fn y(&self) -> f64 {
        self.0.y
    }

    #[getter]
    fn z(&self) -> f64 {
        self.0.z
    }

    /// Image under T(x, y, z) = (2xy − z, x, y).
    fn forward(&self) -> PyResult<Self> {
        geometry::trace_step(self.0).map(PyPoint3).map_err(err)
    }

    fn backward(&self) -> PyResult<Self> {
        geometry::trace_step_inv(self.0).map(PyPoint3).map_err(err)
    }

    fn fricke(&self) -> f64 {
        geometry::fricke(self.0)
    }

    fn to_tuple(&self) -> (f64, f64, f64) {
        (self.0.x, self.0.y, self.0.z)
    }

    fn __repr__(&self) -> String {
        format!("Point3({}, {}, {})", self.0.x, self.0.y, self.0.z)
    }
}

#[pyclass(name = "BandSet", module = "pyfibtrace", from_py_object)]
#[derive(Clone)]
struct PyBandSet(spectrum::BandSet);

#[pymethods]
impl PyBandSet {
    #[new]
    #[pyo3(signature = (intervals, resolution=0.0))]
    fn new(intervals: Vec<(f64, f64)>, resolution: f64) -> PyResult<Self> {
        let b = spectrum::BandSet::from_unsorted(intervals, 0.0, 0).map_err(err)?;
        Ok(PyBandSet(b.with_resolution(resolution)))
    }

    #[getter]
    fn intervals(&self) -> Vec<(f64, f64)> {
        self.0.intervals.clone()
    }

    #[getter]
    fn resolution(&self) -> f64 {
        self.0.resolution
    }

    fn measure(&self) -> f64 {
        self.0.measure()
    }

    fn bounds(&self) -> Option<(f64, f64)> {
        self.0.bounds()
    }

    #[pyo3(signature = (energy, slack=0.0))]
    fn contains(&self, energy: f64, slack: f64) -> bool {
        self.0.contains(energy, slack)
    }

    fn box_count(&self, eps: f64) -> PyResult<u64> {
        dimension::box_count(&self.0, eps).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("BandSet({} bands, measure {})", self.0.len(), self.0.measure())
    }
}

#[pyfunction]
fn line_point(energy: f64, v: f64) -> PyResult<PyPoint3> {
    Ok(PyPoint3(geometry::line_point(energy, coupling(v)?)))
}

#[pyfunction]
fn per2_point(x: f64) -> PyResult<PyPoint3> {
    geometry::per2_point(x).map(PyPoint3).map_err(err)
}

/// Half-traces x_{-1}, x_0, ..., up to k_max or the first overflow.
#[pyfunction]
fn trace_sequence(energy: f64, v: f64, k_max: usize) -> PyResult<Vec<f64>> {
    let s = spectrum::trace_sequence(energy, coupling(v)?, k_max).map_err(err)?;
    Ok((-1..=s.last_index()).filter_map(|k| s.get(k)).collect())
}

#[pyfunction]
#[pyo3(signature = (energy, v, n_max=1000, escape_radius=2.0))]
fn escape_test(py: Python<'_>, energy: f64, v: f64, n_max: usize, escape_radius: f64) -> PyResult<Py<PyAny>> {
    let r = spectrum::escape_test(energy, coupling(v)?, n_max, escape_radius).map_err(err)?;
    to_py(py, &r)
}

/// The cover σ_k ∪ σ_{k+1}.
#[pyfunction]
#[pyo3(signature = (v, k, resolution=1e-3))]
fn spectrum_cover(py: Python<'_>, v: f64, k: usize, resolution: f64) -> PyResult<PyBandSet> {
    let c = coupling(v)?;
    py.detach(|| spectrum::spectrum_cover(c, k, resolution)).map(PyBandSet).map_err(err)
}

#[pyfunction]
fn cantor_set(ratio: f64, depth: u32) -> PyResult<PyBandSet> {
    dimension::cantor_set(ratio, depth).map(PyBandSet).map_err(err)
}

/// Box-counting estimate; eps_min defaults to four times the set's resolution.
#[pyfunction]
#[pyo3(signature = (bands, eps_max=0.1, eps_min=None, ratio=0.5))]
fn box_dimension(
    py: Python<'_>,
    bands: &PyBandSet,
    eps_max: f64,
    eps_min: Option<f64>,
    ratio: f64,
) -> PyResult<Py<PyAny>> {
    let eps_min = eps_min.unwrap_or(4.0 * bands.0.resolution);
    let grid = EpsGrid::geometric(eps_max, eps_min, ratio).map_err(err)?;
    to_py(py, &dimension::box_dimension(&bands.0, &grid).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (couplings, k=None, eps_max=0.1, eps_ratio=0.5))]
fn asymptote_check(
    py: Python<'_>,
    couplings: Vec<f64>,
    k: Option<usize>,
    eps_max: f64,
    eps_ratio: f64,
) -> PyResult<Py<PyAny>> {
    let rows = py.detach(|| dimension::asymptote_check(&couplings, k, eps_max, eps_ratio)).map_err(err)?;
    to_py(py, &rows)
}

#[pyfunction]
fn check_semiconjugacy(py: Python<'_>, grid_resolution: usize) -> PyResult<f64> {
    py.detach(|| torus::check_semiconjugacy(grid_resolution)).map_err(err)
}

/// (word_count, periodic_count) for words of length n.
#[pyfunction]
fn subshift_counts(n: usize) -> PyResult<(u64, u64)> {
    let c = SubshiftSpec::default().counts(n).map_err(err)?;
    Ok((c.word_count, c.periodic_count))
}

#[pyfunction]
fn subshift_entropy(py: Python<'_>) -> PyResult<Py<PyAny>> {
    to_py(py, &SubshiftSpec::default().entropy())
}

#[pyfunction]
fn singular_eigen(py: Python<'_>) -> PyResult<Py<PyAny>> {
    to_py(py, &hyperbolic::singular_eigen())
}

fn recurrence_params(lambda: Option<f64>, epsilon: f64, delta: f64, c1: f64, c2: f64) -> PyResult<RecurrenceParams> {
    let d = RecurrenceParams::default();
    let p = RecurrenceParams { c1, c2, lambda: lambda.unwrap_or(d.lambda), epsilon, delta };
    p.validate().map_err(err)?;
    Ok(p)
}

#[pyfunction]
#[pyo3(signature = (n, delta=1e-3, epsilon=0.1, lambda_=None, c1=1.0, c2=1.0))]
fn run_dd(
    py: Python<'_>,
    n: usize,
    delta: f64,
    epsilon: f64,
    lambda_: Option<f64>,
    c1: f64,
    c2: f64,
) -> PyResult<Py<PyAny>> {
    let p = recurrence_params(lambda_, epsilon, delta, c1, c2)?;
    to_py(py, &hyperbolic::run_dd(&p, n, None).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (n_ref=DEFAULT_N_REF, epsilon=0.1, lambda_=None, c1=1.0, c2=1.0))]
fn find_passing_pair(
    py: Python<'_>,
    n_ref: usize,
    epsilon: f64,
    lambda_: Option<f64>,
    c1: f64,
    c2: f64,
) -> PyResult<Py<PyAny>> {
    let p = recurrence_params(lambda_, epsilon, 1e-3, c1, c2)?;
    to_py(py, &hyperbolic::find_passing_pair(&p, n_ref).map_err(err)?)
}

/// Cone-vector sweep on the model map with perturbation size delta. n0
/// defaults to the smallest passing N of the recurrence at delta.
#[pyfunction]
#[pyo3(signature = (delta=1e-3, samples=1000, seed=0, n0=None))]
fn model_map_sweep(py: Python<'_>, delta: f64, samples: usize, seed: u64, n0: Option<usize>) -> PyResult<Py<PyAny>> {
    let cert_delta = if delta > 0.0 { delta } else { RecurrenceParams::default().delta };
    let n0 = match n0 {
        Some(n) => n,
        None => hyperbolic::min_passing_n(&RecurrenceParams::default().with_delta(cert_delta), DEFAULT_N_REF)
            .ok_or_else(|| PyValueError::new_err(format!("no passing N at delta = {cert_delta}")))?,
    };
    let map = hyperbolic::make_model_map(ModelMapSpec { delta, seed, ..Default::default() }).map_err(err)?;
    let params = CertifyParams { delta: cert_delta, ..Default::default() };
    let s = py
        .detach(|| hyperbolic::model_map_sweep(&map, &ConeSpec3D::default(), &params, n0, samples, seed))
        .map_err(err)?;
    to_py(py, &s)
}

#[pyfunction]
#[pyo3(signature = (coupling=0.05, samples=1000, n=30, seed=0))]
fn empirical_certificate(py: Python<'_>, coupling: f64, samples: usize, n: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let p = EmpiricalParams { coupling, samples, n, seed, ..Default::default() };
    let r = py.detach(|| hyperbolic::empirical_trace_certificate(&p)).map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
fn pyfibtrace(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", fibtrace::VERSION)?;
    m.add("GOLDEN", fibtrace::GOLDEN)?;
    m.add_class::<PyPoint3>()?;
    m.add_class::<PyBandSet>()?;
    m.add_function(wrap_pyfunction!(line_point, m)?)?;
    m.add_function(wrap_pyfunction!(per2_point, m)?)?;
    m.add_function(wrap_pyfunction!(trace_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(escape_test, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_cover, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_set, m)?)?;
    m.add_function(wrap_pyfunction!(box_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(asymptote_check, m)?)?;
    m.add_function(wrap_pyfunction!(check_semiconjugacy, m)?)?;
    m.add_function(wrap_pyfunction!(subshift_counts, m)?)?;
    m.add_function(wrap_pyfunction!(subshift_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(singular_eigen, m)?)?;
    m.add_function(wrap_pyfunction!(run_dd, m)?)?;
    m.add_function(wrap_pyfunction!(find_passing_pair, m)?)?;
    m.add_function(wrap_pyfunction!(model_map_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_certificate, m)?)?;
    Ok(())
}
