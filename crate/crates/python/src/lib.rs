//! Python bindings. Matrices cross the boundary as lists of rows of complex
//! numbers (anything `complex()` accepts, so nested lists and numpy arrays
//! both work); regions, maps and model specs as JSON strings or plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::de::DeserializeOwned;

use jointspec::linalg::CMatrix;
use jointspec::measures::{self, AtomicMeasure as CoreMeasure, MapDescriptor};
use jointspec::models::ModelSpec;
use jointspec::potential::{self, GridSpec};
use jointspec::spectral::{CommutingTuple as CoreTuple, JointDecomposition};
use jointspec::suite::{self as core_suite, ModelKind, Source, Suite, SuiteOptions};
use jointspec::{Error, Idempotent as CoreIdempotent, Region, Subspace as CoreSubspace, Tolerances, C64};

create_exception!(pyjointspec, JointspecError, PyValueError, "Raised for any refused input or failed numerical step.");
create_exception!(pyjointspec, NonCommutingError, JointspecError, "The matrices do not commute within tolerance.");

fn err(e: Error) -> PyErr {
    match e {
        Error::NonCommuting { .. } => NonCommutingError::new_err(e.to_string()),
        _ => JointspecError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<C64>>;

fn to_matrix(rows: Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(JointspecError::new_err("ragged matrix rows"));
    }
    if rows.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(JointspecError::new_err("matrix entries must be finite"));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Deserialize a JSON string, or a Python object by way of `json.dumps`.
fn from_json_arg<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = obj.cast::<PyString>() {
        s.to_string()
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| JointspecError::new_err(format!("invalid JSON argument: {e}")))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// A validated commuting tuple `(T_1, ..., T_n)` of `d x d` matrices.
#[pyclass(module = "pyjointspec", name = "CommutingTuple", frozen)]
struct CommutingTuple {
    inner: CoreTuple,
}

#[pymethods]
impl CommutingTuple {
    #[new]
    #[pyo3(signature = (matrices, commute_tol=None))]
    fn new(matrices: Vec<Rows>, commute_tol: Option<f64>) -> PyResult<Self> {
        let mats = matrices.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        let tol = commute_tol.unwrap_or(jointspec::tol::COMMUTE);
        Ok(CommutingTuple { inner: CoreTuple::with_tol(mats, tol).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn commutator_bound(&self) -> f64 {
        self.inner.commutator_bound()
    }

    fn matrices(&self) -> Vec<Rows> {
        self.inner.mats().iter().map(to_rows).collect()
    }

    /// Joint spectral decomposition. Keyword tolerances override the defaults.
    #[pyo3(signature = (**overrides))]
    fn decompose(&self, overrides: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Decomposition> {
        let mut tol = serde_json::to_value(Tolerances::default()).expect("tolerances serialize");
        if let Some(d) = overrides {
            for (k, v) in d.iter() {
                let key: String = k.extract()?;
                let slot = tol.get_mut(&key).ok_or_else(|| JointspecError::new_err(format!("unknown tolerance '{key}'")))?;
                *slot = serde_json::json!(v.extract::<f64>()?);
            }
        }
        let tol: Tolerances = serde_json::from_value(tol).expect("same shape");
        let inner = JointDecomposition::compute_with(&self.inner, &tol).map_err(err)?;
        Ok(Decomposition { inner })
    }

    /// Shorthand for `decompose().brown()`.
    fn brown(&self) -> PyResult<Measure> {
        let dec = JointDecomposition::compute(&self.inner).map_err(err)?;
        Ok(Measure { inner: measures::brown(&dec) })
    }

    fn __repr__(&self) -> String {
        format!("CommutingTuple(arity={}, dim={})", self.inner.arity(), self.inner.dim())
    }
}

#[pyclass(module = "pyjointspec", name = "Decomposition", frozen)]
struct Decomposition {
    inner: JointDecomposition,
}

#[pymethods]
impl Decomposition {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `(point, multiplicity)` for each joint eigenvalue cluster.
    fn clusters(&self) -> Vec<(Vec<C64>, usize)> {
        self.inner.clusters().iter().map(|c| (c.point.clone(), c.multiplicity)).collect()
    }

    fn cluster_space(&self, index: usize) -> PyResult<Subspace> {
        let c = self.inner.clusters().get(index).ok_or_else(|| JointspecError::new_err("cluster index out of range"))?;
        Ok(Subspace { inner: c.space.clone() })
    }

    fn basis_cond(&self) -> f64 {
        self.inner.basis_cond()
    }

    fn brown(&self) -> Measure {
        Measure { inner: measures::brown(&self.inner) }
    }

    fn spectral_projection(&self, region: &Bound<'_, PyAny>) -> PyResult<Subspace> {
        let r: Region = from_json_arg(region)?;
        Ok(Subspace { inner: self.inner.spectral_projection(&r).map_err(err)? })
    }

    fn riesz_idempotent(&self, region: &Bound<'_, PyAny>) -> PyResult<Idempotent> {
        let r: Region = from_json_arg(region)?;
        Ok(Idempotent { inner: self.inner.riesz_idempotent(&r).map_err(err)? })
    }

    /// `tau(E(B))`, the normalized trace of the spectral idempotent.
    fn spectral_trace(&self, region: &Bound<'_, PyAny>) -> PyResult<f64> {
        let r: Region = from_json_arg(region)?;
        Ok(self.inner.spectral_trace(&r).map_err(err)?.value())
    }

    fn to_json(&self) -> String {
        to_json(&self.inner.to_json())
    }
}

/// A finitely supported probability measure on `C^n`.
#[pyclass(module = "pyjointspec", name = "Measure", frozen)]
struct Measure {
    inner: CoreMeasure,
}

#[pymethods]
impl Measure {
    #[new]
    #[pyo3(signature = (dim, atoms))]
    fn new(dim: usize, atoms: Vec<(Vec<C64>, f64)>) -> PyResult<Self> {
        Ok(Measure { inner: CoreMeasure::from_pairs(dim, atoms).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| JointspecError::new_err(e.to_string()))?;
        Ok(Measure { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn atoms(&self) -> Vec<(Vec<C64>, f64)> {
        self.inner.atoms().iter().map(|a| (a.point.clone(), a.weight)).collect()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn mass_of(&self, region: &Bound<'_, PyAny>) -> PyResult<f64> {
        let r: Region = from_json_arg(region)?;
        self.inner.mass_of(&r).map_err(err)
    }

    /// Push forward under a map descriptor, e.g. `{"map": "coordinate", "index": 0}`.
    fn pushforward(&self, map: &Bound<'_, PyAny>) -> PyResult<Measure> {
        let m: MapDescriptor = from_json_arg(map)?;
        Ok(Measure { inner: measures::pushforward(&self.inner, &m).map_err(err)? })
    }

    /// Matching distance between atomic measures.
    fn distance(&self, other: &Measure) -> PyResult<f64> {
        measures::measure_distance(&self.inner, &other.inner).map_err(err)
    }

    fn modified_spectral_radius(&self) -> PyResult<f64> {
        measures::modified_spectral_radius(&self.inner).map_err(err)
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Measure(dim={}, atoms={})", self.inner.dim(), self.inner.len())
    }
}

/// A subspace of `C^d`, held as an orthonormal frame.
#[pyclass(module = "pyjointspec", name = "Subspace", frozen)]
struct Subspace {
    inner: CoreSubspace,
}

#[pymethods]
impl Subspace {
    /// Span of the columns of `vectors`.
    #[staticmethod]
    fn span(vectors: Rows) -> PyResult<Self> {
        Ok(Subspace { inner: CoreSubspace::span(&to_matrix(vectors)?) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn frame(&self) -> Rows {
        to_rows(self.inner.frame())
    }

    fn projector(&self) -> Rows {
        to_rows(&self.inner.projector())
    }

    fn meet(&self, other: &Subspace) -> PyResult<Subspace> {
        Ok(Subspace { inner: self.inner.meet(&other.inner).map_err(err)? })
    }

    fn join(&self, other: &Subspace) -> PyResult<Subspace> {
        Ok(Subspace { inner: self.inner.join(&other.inner).map_err(err)? })
    }

    fn complement(&self) -> Subspace {
        Subspace { inner: self.inner.complement() }
    }

    /// Projector distance `||P - Q||`.
    fn distance(&self, other: &Subspace) -> PyResult<f64> {
        self.inner.distance(&other.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Subspace(dim={}, ambient_dim={})", self.inner.dim(), self.inner.ambient_dim())
    }
}

/// An idempotent given by its range and kernel.
#[pyclass(module = "pyjointspec", name = "Idempotent", frozen)]
struct Idempotent {
    inner: CoreIdempotent,
}

#[pymethods]
impl Idempotent {
    #[staticmethod]
    fn from_pair(range: &Subspace, kernel: &Subspace) -> PyResult<Self> {
        Ok(Idempotent { inner: CoreIdempotent::from_pair(range.inner.clone(), kernel.inner.clone()).map_err(err)? })
    }

    #[staticmethod]
    fn from_matrix(e: Rows) -> PyResult<Self> {
        Ok(Idempotent { inner: CoreIdempotent::from_matrix(&to_matrix(e)?).map_err(err)? })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.trace().rank
    }

    /// Normalized trace `rank / d`.
    fn trace(&self) -> f64 {
        self.inner.trace().value()
    }

    fn range(&self) -> Subspace {
        Subspace { inner: self.inner.range().clone() }
    }

    fn kernel(&self) -> Subspace {
        Subspace { inner: self.inner.kernel().clone() }
    }

    fn complement(&self) -> Idempotent {
        Idempotent { inner: self.inner.complement() }
    }

    /// The matrix of the idempotent and the condition number of its basis.
    fn matrix(&self) -> PyResult<(Rows, f64)> {
        let m = self.inner.materialize().map_err(err)?;
        Ok((to_rows(&m.matrix), m.cond))
    }

    fn distance(&self, other: &Idempotent) -> PyResult<f64> {
        self.inner.distance(&other.inner).map_err(err)
    }

    fn to_json(&self) -> String {
        to_json(&self.inner.to_json())
    }
}

/// Generate a model from its spec; returns the matrices and the exact
/// joint Brown measure when the construction knows it.
#[pyfunction]
fn generate(spec: &Bound<'_, PyAny>) -> PyResult<(Vec<Rows>, Option<Measure>)> {
    let spec: ModelSpec = from_json_arg(spec)?;
    let m = spec.generate().map_err(err)?;
    Ok((m.mats.iter().map(to_rows).collect(), m.oracle.map(|inner| Measure { inner })))
}

/// Run verification suites; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (suites=None, models=None, seeds=vec![1], max_dim=16, trials=4, tuple=None))]
fn verify(
    suites: Option<Vec<String>>,
    models: Option<Vec<String>>,
    seeds: Vec<u64>,
    max_dim: usize,
    trials: usize,
    tuple: Option<&CommutingTuple>,
) -> PyResult<String> {
    let suites: Vec<Suite> = match suites {
        Some(s) => s.iter().map(|x| x.parse()).collect::<Result<_, _>>().map_err(err)?,
        None => Suite::ALL.to_vec(),
    };
    let mut sources: Vec<Source> = match models {
        Some(m) => m.iter().map(|x| x.parse().map(Source::Model)).collect::<Result<_, _>>().map_err(err)?,
        None if tuple.is_none() => ModelKind::ALL.into_iter().map(Source::Model).collect(),
        None => Vec::new(),
    };
    if let Some(t) = tuple {
        sources.push(Source::Tuple { name: "python".into(), tuple: t.inner.clone() });
    }
    let opts = SuiteOptions { max_dim, trials, ..SuiteOptions::default() };
    let report = core_suite::run(&suites, &sources, &seeds, &opts).map_err(err)?;
    Ok(to_json(&report))
}

/// Regularized log-potential Brown density of one matrix on a square grid.
/// Returns `(cell_mass rows, total_mass, epsilon)`.
#[pyfunction]
#[pyo3(signature = (matrix, radius, cells=100, epsilon=None))]
fn grid_brown(matrix: Rows, radius: f64, cells: usize, epsilon: Option<f64>) -> PyResult<(Vec<Vec<f64>>, f64, f64)> {
    let t = to_matrix(matrix)?;
    let eps = epsilon.unwrap_or_else(|| potential::default_epsilon(&t));
    let spec = GridSpec::centered(radius, cells, cells);
    let g = potential::grid_brown(&t, &spec, eps).map_err(err)?;
    let rows = (0..spec.ny).map(|j| (0..spec.nx).map(|i| g.mass(i, j)).collect()).collect();
    Ok((rows, g.total_mass, eps))
}

/// Fuglede-Kadison log-determinant `tau(log |A|)`.
#[pyfunction]
fn fk_log_det(matrix: Rows) -> PyResult<f64> {
    potential::fk_log_det(&to_matrix(matrix)?).map_err(err)
}

#[pymodule]
fn pyjointspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CommutingTuple>()?;
    m.add_class::<Decomposition>()?;
    m.add_class::<Measure>()?;
    m.add_class::<Subspace>()?;
    m.add_class::<Idempotent>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(grid_brown, m)?)?;
    m.add_function(wrap_pyfunction!(fk_log_det, m)?)?;
    m.add("JointspecError", m.py().get_type::<JointspecError>())?;
    m.add("NonCommutingError", m.py().get_type::<NonCommutingError>())?;
    Ok(())
}
