//! Python bindings. Documents cross the boundary as the same JSON the CLI
//! prints, decoded with the `json` module.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use repairscope::inference::ics_core;
use repairscope::metric::{self, Generalisation};
use repairscope::repairs::compute_conflicts;
use repairscope::session::ClusteringParams;
use repairscope::{
    compute_repairs, parse_kb, parse_query, to_json, Atom, Error, QueryRequest, Scope, ScopeSpec,
    Semantics, SessionConfig, WeightScheme,
};

create_exception!(repairscope_py, RepairscopeError, PyValueError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyOSError::new_err(msg),
        other => RepairscopeError::new_err(other.to_string()),
    }
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn weights(w: Option<(f64, f64, f64, f64)>) -> PyResult<WeightScheme> {
    match w {
        None => Ok(WeightScheme::default()),
        Some((p, c, v, l)) => WeightScheme::new(p, c, v, l).map_err(py_err),
    }
}

fn single_atom(text: &str) -> PyResult<Atom> {
    let mut q = parse_query(text).map_err(py_err)?;
    if q.atoms.len() != 1 {
        return Err(RepairscopeError::new_err(format!(
            "expected one atom, got `{text}`"
        )));
    }
    Ok(q.atoms.remove(0))
}

fn atoms(texts: Vec<String>) -> PyResult<Vec<Atom>> {
    texts.iter().map(|t| single_atom(t)).collect()
}

fn clustering(
    method: Option<String>,
    k: Option<usize>,
    sigma: Option<f64>,
    seed: Option<u64>,
    tau: Option<f64>,
) -> PyResult<Option<repairscope::ClusteringMethod>> {
    ClusteringParams {
        method,
        k,
        sigma,
        seed,
        tau,
    }
    .to_method()
    .map_err(py_err)
}

/// A parsed knowledge base.
#[pyclass(module = "repairscope_py", frozen)]
struct KnowledgeBase {
    inner: repairscope::KnowledgeBase,
}

#[pymethods]
impl KnowledgeBase {
    #[new]
    #[pyo3(signature = (text, max_rounds = 64))]
    fn new(text: &str, max_rounds: usize) -> PyResult<Self> {
        let inner = parse_kb(text).map_err(py_err)?.with_max_rounds(max_rounds);
        Ok(KnowledgeBase { inner })
    }

    #[getter]
    fn facts(&self) -> Vec<String> {
        self.inner.facts().iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn rules(&self) -> Vec<String> {
        self.inner.rules().iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn constraints(&self) -> Vec<String> {
        self.inner
            .constraints()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// Fact-index sets of the repairs, in canonical order.
    fn repairs(&self) -> PyResult<Vec<Vec<usize>>> {
        let rs = compute_repairs(&self.inner).map_err(py_err)?;
        Ok(rs
            .index_sets()
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect())
    }

    /// Fact-index sets of the minimal inconsistent subsets.
    fn conflicts(&self) -> PyResult<Vec<Vec<usize>>> {
        let cs = compute_conflicts(&self.inner).map_err(py_err)?;
        Ok(cs.into_iter().map(|c| c.0.into_iter().collect()).collect())
    }

    /// Ground closure of the facts at `indices` (all facts by default).
    #[pyo3(signature = (indices = None))]
    fn closure(&self, indices: Option<Vec<usize>>) -> PyResult<Vec<String>> {
        let n = self.inner.facts().len();
        let indices = indices.unwrap_or_else(|| (0..n).collect());
        if let Some(bad) = indices.iter().find(|&&i| i >= n) {
            return Err(RepairscopeError::new_err(format!("no fact at index {bad}")));
        }
        let sat = self.inner.saturate_subset(&indices).map_err(py_err)?;
        Ok(sat.ground_atoms().iter().map(ToString::to_string).collect())
    }

    #[pyo3(signature = (indices = None))]
    fn is_consistent(&self, indices: Option<Vec<usize>>) -> PyResult<bool> {
        let indices = indices.unwrap_or_else(|| (0..self.inner.facts().len()).collect());
        self.inner.is_consistent_subset(&indices).map_err(py_err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "KnowledgeBase({} facts, {} rules, {} constraints)",
            self.inner.facts().len(),
            self.inner.rules().len(),
            self.inner.constraints().len()
        )
    }
}

/// A KB with its repairs, distance matrix and embedding.
#[pyclass(module = "repairscope_py", frozen)]
struct Session {
    inner: repairscope::Session,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (kb_text, weights = None, max_rounds = 64))]
    fn new(
        kb_text: &str,
        weights: Option<(f64, f64, f64, f64)>,
        max_rounds: usize,
    ) -> PyResult<Self> {
        let config = SessionConfig {
            weights: self::weights(weights)?,
            max_rounds,
            ..SessionConfig::default()
        };
        let inner = repairscope::Session::create(kb_text, config).map_err(py_err)?;
        Ok(Session { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Session {
            inner: repairscope::Session::load(path).map_err(py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id().to_owned()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.repairs().labels()
    }

    #[getter]
    fn repair_count(&self) -> usize {
        self.inner.repairs().len()
    }

    fn repairs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &to_json(&self.inner.repairs_document()))
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.matrix().values().to_vec()
    }

    fn matrix_csv(&self) -> String {
        self.inner.matrix().to_csv()
    }

    fn embedding<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &to_json(self.inner.embedding()))
    }

    /// The analysis document as the CLI and HTTP service serialize it.
    #[pyo3(signature = (method = None, k = None, sigma = None, seed = None, tau = None))]
    fn analysis_json(
        &self,
        method: Option<String>,
        k: Option<usize>,
        sigma: Option<f64>,
        seed: Option<u64>,
        tau: Option<f64>,
    ) -> PyResult<String> {
        let method = clustering(method, k, sigma, seed, tau)?;
        let doc = self.inner.analysis(method.as_ref()).map_err(py_err)?;
        Ok(to_json(&doc))
    }

    #[pyo3(signature = (method = None, k = None, sigma = None, seed = None, tau = None))]
    fn analysis<'py>(
        &self,
        py: Python<'py>,
        method: Option<String>,
        k: Option<usize>,
        sigma: Option<f64>,
        seed: Option<u64>,
        tau: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &self.analysis_json(method, k, sigma, seed, tau)?)
    }

    /// Blocks of the partition as label lists.
    #[pyo3(signature = (method = None, k = None, sigma = None, seed = None, tau = None))]
    fn partition(
        &self,
        method: Option<String>,
        k: Option<usize>,
        sigma: Option<f64>,
        seed: Option<u64>,
        tau: Option<f64>,
    ) -> PyResult<Vec<Vec<String>>> {
        let method = clustering(method, k, sigma, seed, tau)?;
        let p = self.inner.partition(method.as_ref()).map_err(py_err)?;
        Ok(p.labelled(self.inner.matrix().labels()))
    }

    /// Answer document for `scope`: "all", "partition", "cluster:<i>",
    /// "repairs:<labels>" or a list of labels.
    #[pyo3(signature = (query, semantics = "AR", scope = None, method = None, k = None, sigma = None, seed = None, tau = None))]
    #[allow(clippy::too_many_arguments)]
    fn query<'py>(
        &self,
        py: Python<'py>,
        query: &str,
        semantics: &str,
        scope: Option<Bound<'py, PyAny>>,
        method: Option<String>,
        k: Option<usize>,
        sigma: Option<f64>,
        seed: Option<u64>,
        tau: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let scope = match scope {
            None => ScopeSpec::Named(repairscope::session::NamedScope::All),
            Some(s) => match s.extract::<String>() {
                Ok(text) => text.parse().map_err(py_err)?,
                Err(_) => ScopeSpec::Repairs {
                    repairs: s.extract::<Vec<String>>()?,
                },
            },
        };
        let request = QueryRequest {
            query: query.to_owned(),
            semantics: semantics.parse::<Semantics>().map_err(py_err)?,
            scope,
            clustering: clustering(method, k, sigma, seed, tau)?,
        };
        let answer = self.inner.answer_query(&request).map_err(py_err)?;
        json_loads(py, &to_json(&answer))
    }

    /// Atoms true in every closure of the given repairs.
    fn consensus(&self, labels: Vec<String>) -> PyResult<Vec<String>> {
        let rs = self.inner.repairs();
        let scope = Scope::from_labels(&labels, rs).map_err(py_err)?;
        let core = ics_core(self.inner.kb(), rs, &scope).map_err(py_err)?;
        Ok(core.iter().map(ToString::to_string).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Session(id={:?}, repairs={})",
            self.inner.id(),
            self.inner.repairs().len()
        )
    }
}

/// Least general generalisation of two atoms, or None when there is none.
#[pyfunction]
fn lgg(a: &str, b: &str) -> PyResult<Option<String>> {
    Ok(match metric::lgg(&single_atom(a)?, &single_atom(b)?) {
        Generalisation::Atom(g) => Some(g.to_string()),
        Generalisation::Top => None,
    })
}

#[pyfunction]
#[pyo3(signature = (a, b, weights = None))]
fn atom_distance(a: &str, b: &str, weights: Option<(f64, f64, f64, f64)>) -> PyResult<f64> {
    Ok(metric::atom_distance(
        &single_atom(a)?,
        &single_atom(b)?,
        &self::weights(weights)?,
    ))
}

/// Matching distance between two atom lists.
#[pyfunction]
#[pyo3(signature = (a, b, weights = None))]
fn repair_distance(
    a: Vec<String>,
    b: Vec<String>,
    weights: Option<(f64, f64, f64, f64)>,
) -> PyResult<f64> {
    Ok(metric::repair_distance(
        &atoms(a)?,
        &atoms(b)?,
        &self::weights(weights)?,
    ))
}

#[pymodule]
pub fn repairscope_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<KnowledgeBase>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(lgg, m)?)?;
    m.add_function(wrap_pyfunction!(atom_distance, m)?)?;
    m.add_function(wrap_pyfunction!(repair_distance, m)?)?;
    m.add("RepairscopeError", m.py().get_type::<RepairscopeError>())?;
    Ok(())
}
