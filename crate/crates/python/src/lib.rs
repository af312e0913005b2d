//! Python bindings for `dilatation-core`, importable as `dilatation_lab`.
//!
//! Structured reports come back as plain dicts and lists.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use dilatation_core::bump::{self, SearchConfig};
use dilatation_core::exact::parse_rational;
use dilatation_core::identities::{self, BumpVectorField};
use dilatation_core::mapping::{self, Dilatation, Domain};
use dilatation_core::singular::{self, PointCloud};
use dilatation_core::tensorgrid::{make_grid, smooth_cutoff, GridDomain};
use dilatation_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::DegenerateBox { .. }
        | Error::ResolutionTooCoarse { .. }
        | Error::GridTooLarge { .. }
        | Error::UnknownMapping(_)
        | Error::MalformedSpec(_)
        | Error::OutsideDomain(_)
        | Error::DimensionMismatch { .. }
        | Error::SupportExceedsGrid { .. }
        | Error::OutsideBumpDomain { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

trait PyResultExt<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> PyResultExt<T> for dilatation_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, data: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(data).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// Piecewise radial bump profile of radius `a` in dimension `n`.
#[pyclass(name = "BumpProfile", module = "dilatation_lab")]
struct PyBumpProfile {
    inner: bump::BumpProfile,
}

#[pymethods]
impl PyBumpProfile {
    /// Profile with the closed-form head value.
    #[new]
    #[pyo3(signature = (a, n = 3))]
    fn new(a: f64, n: usize) -> PyResult<Self> {
        Ok(Self { inner: bump::BumpProfile::closed_form(a, n).py()? })
    }

    /// Profile from the certified head-value search; `cap`, `floor` and `step` are rationals.
    #[staticmethod]
    #[pyo3(signature = (a, n = 3, cap = None, floor = None, step = None))]
    fn construct(a: f64, n: usize, cap: Option<&str>, floor: Option<&str>, step: Option<&str>) -> PyResult<Self> {
        use dilatation_core::exact::ExactReal;
        let mut config = SearchConfig::default();
        if let Some(c) = cap {
            config = config.with_cap(ExactReal::from_rational(parse_rational(c).py()?));
        }
        if let Some(f) = floor {
            config = config.with_floor(ExactReal::from_rational(parse_rational(f).py()?));
        }
        if let Some(s) = step {
            config.step = parse_rational(s).py()?;
        }
        let outcome = bump::construct_bump(n, a, &config).py()?;
        Ok(Self { inner: outcome.profile().clone() })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    fn __call__(&self, r: f64) -> PyResult<f64> {
        self.inner.eval(r).py()
    }

    fn eval(&self, r: f64) -> PyResult<f64> {
        self.inner.eval(r).py()
    }

    fn derivative(&self, r: f64) -> PyResult<f64> {
        self.inner.derivative(r).py()
    }

    fn second_derivative(&self, r: f64) -> PyResult<f64> {
        self.inner.second_derivative(r).py()
    }

    /// Radial n-Laplacian at radius `r`, in dimension `n` (default: the profile's own).
    #[pyo3(signature = (r, n = None))]
    fn n_laplacian(&self, r: f64, n: Option<usize>) -> PyResult<f64> {
        self.inner.n_laplacian(n.unwrap_or(self.inner.dim()), r).py()
    }

    /// Inner coefficients `[c0, c2, c4, c6]` as floats.
    fn coefficients(&self) -> [f64; 4] {
        self.inner.coefficients()
    }

    /// Inner coefficients as exact strings in `ln2` and `ln(1/a)`.
    fn exact_coefficients(&self) -> Vec<String> {
        self.inner.exact_coefficients().iter().map(|c| c.to_string()).collect()
    }

    /// Sampled property suite as a dict.
    #[pyo3(signature = (samples = None))]
    fn verify<'py>(&self, py: Python<'py>, samples: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let mut config = bump::PropertyConfig::default();
        if let Some(s) = samples {
            config.samples_per_piece = s;
        }
        to_py(py, &bump::verify_properties(&self.inner, &config).py()?)
    }

    /// Sign certificates of the three pieces.
    fn certify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &bump::certify_profile(&self.inner).py()?)
    }

    fn __repr__(&self) -> String {
        format!("BumpProfile(a={}, n={})", self.inner.a(), self.inner.dim())
    }
}

/// Catalog mapping built from a spec such as `"winding:k=2"`.
#[pyclass(name = "Mapping", module = "dilatation_lab")]
struct PyMapping {
    inner: mapping::Mapping,
}

fn domain_grid(f: &mapping::Mapping, res: usize) -> PyResult<GridDomain> {
    let bounds: Vec<(f64, f64)> = match f.domain() {
        Domain::Box { lower, upper } => lower.iter().copied().zip(upper.iter().copied()).collect(),
        Domain::Ball { center, radius } => center.iter().map(|c| (c - radius, c + radius)).collect(),
    };
    make_grid(f.dim(), &bounds, &vec![res; f.dim()]).py()
}

#[pymethods]
impl PyMapping {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self { inner: mapping::parse_mapping_spec(spec).py()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn spec(&self) -> String {
        self.inner.spec_string()
    }

    fn metadata<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.metadata())
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.eval(&x).py()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.eval(&x).py()
    }

    /// Differential record at `x`: DF, J, |DF|, adj(DF), K.
    fn differential<'py>(&self, py: Python<'py>, x: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &mapping::differential(&self.inner, &x).py()?.record())
    }

    /// Dilatation `K(x)`; `inf` where the map folds.
    fn dilatation(&self, x: Vec<f64>) -> PyResult<f64> {
        let s = mapping::differential(&self.inner, &x).py()?;
        Ok(match s.dilatation {
            Dilatation::Infinite => f64::INFINITY,
            k => k.value(),
        })
    }

    /// `∫ K^p` over the mapping domain at the given grid resolution.
    #[pyo3(signature = (p, resolution = 129))]
    fn dilatation_integral<'py>(&self, py: Python<'py>, p: f64, resolution: usize) -> PyResult<Bound<'py, PyAny>> {
        let grid = Arc::new(domain_grid(&self.inner, resolution)?);
        to_py(py, &mapping::dilatation_integral(&self.inner, &grid, p).py()?)
    }

    /// Polyconvex energy with growth exponents `alpha`, `beta`.
    #[pyo3(signature = (alpha, beta, resolution = 129))]
    fn energy<'py>(&self, py: Python<'py>, alpha: f64, beta: f64, resolution: usize) -> PyResult<Bound<'py, PyAny>> {
        let grid = Arc::new(domain_grid(&self.inner, resolution)?);
        to_py(py, &mapping::polyconvex_energy(&self.inner, &grid, alpha, beta).py()?)
    }

    /// Zero set on the domain grid: list of points.
    #[pyo3(signature = (resolution = 257, tol = 1e-9))]
    fn zero_set(&self, resolution: usize, tol: f64) -> PyResult<Vec<Vec<f64>>> {
        let grid = domain_grid(&self.inner, resolution)?;
        Ok(singular::zero_set(&self.inner, &grid, tol).py()?.points)
    }

    /// Box-counting estimate of the zero-set dimension.
    #[pyo3(signature = (resolution = 257, tol = 1e-9))]
    fn zero_set_dimension<'py>(&self, py: Python<'py>, resolution: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let grid = domain_grid(&self.inner, resolution)?;
        let cloud = singular::zero_set(&self.inner, &grid, tol).py()?;
        to_py(py, &singular::box_counting_dimension(&cloud, &singular::grid_scales(&grid)).py()?)
    }

    fn __repr__(&self) -> String {
        format!("Mapping({:?})", self.inner.spec_string())
    }
}

/// Largest admissible `eps` for integrability exponent `p` (float).
#[pyfunction]
fn admissible_epsilon(n: usize, p: f64) -> PyResult<f64> {
    identities::admissible_epsilon(n, p).py()
}

/// Exact version: `p` and the result are rational strings such as `"5/2"`.
#[pyfunction]
fn admissible_epsilon_exact(n: usize, p: &str) -> PyResult<String> {
    let p = parse_rational(p).py()?;
    Ok(identities::admissible_epsilon_exact(n, &p).py()?.to_string())
}

#[pyfunction]
fn hausdorff_bound(n: usize, eps: f64) -> PyResult<f64> {
    identities::hausdorff_bound(n, eps).py()
}

#[pyfunction]
fn target_radius() -> f64 {
    dilatation_core::target_radius()
}

/// Box-counting dimension of an explicit point cloud in the box `[lower, upper]`.
#[pyfunction]
fn box_counting_dimension<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    scales: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let dim = lower.len();
    if upper.len() != dim || points.iter().any(|p| p.len() != dim) {
        return Err(PyValueError::new_err(format!("points and box corners must all have length {dim}")));
    }
    let cloud = PointCloud::new(dim, points, lower, upper);
    to_py(py, &singular::box_counting_dimension(&cloud, &scales).py()?)
}

/// Weak-form identity sweep for the bump field of radius `a` pulled back by `mapping`.
#[pyfunction]
#[pyo3(signature = (mapping, a = 0.01, half_width = 0.06, resolutions = vec![65, 129, 257]))]
fn check_identity<'py>(
    py: Python<'py>,
    mapping: &str,
    a: f64,
    half_width: f64,
    resolutions: Vec<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let f = mapping::parse_mapping_spec(mapping).py()?;
    let n = f.dim();
    let profile = bump::BumpProfile::closed_form(a, n).py()?;
    let v = BumpVectorField::new(&profile, n).py()?;
    let eta = smooth_cutoff(vec![0.0; n], 0.25 * half_width, 5.0 / 6.0 * half_width).py()?;
    let grids = resolutions
        .iter()
        .map(|&r| GridDomain::cube(n, -half_width, half_width, r))
        .collect::<dilatation_core::Result<Vec<_>>>()
        .py()?;
    to_py(py, &identities::weak_identity_sweep(&f, &v, &eta, &grids).py()?)
}

#[pymodule]
fn dilatation_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBumpProfile>()?;
    m.add_class::<PyMapping>()?;
    m.add_function(wrap_pyfunction!(admissible_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_epsilon_exact, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff_bound, m)?)?;
    m.add_function(wrap_pyfunction!(target_radius, m)?)?;
    m.add_function(wrap_pyfunction!(box_counting_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(check_identity, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
