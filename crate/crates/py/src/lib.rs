//! Python bindings.
//!
//! Results cross the boundary as plain Python objects (dicts and lists),
//! converted from the same JSON documents the HTTP service returns.

use std::collections::BTreeSet;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use apitask_kg::graphstore::{GraphError, KnowledgeGraph as CoreGraph};
use apitask_kg::packet::ApiPacket as CorePacket;
use apitask_kg::pipeline::{open_engine, GraphStats, Pipeline as CorePipeline, PipelineConfig, PipelineError, Stage};
use apitask_kg::search::{SearchEngine as CoreEngine, SearchError};

create_exception!(apitask_kg_py, KgError, PyException, "Base class of the errors raised here.");
create_exception!(apitask_kg_py, ConfigError, KgError, "Invalid configuration or missing prerequisite.");
create_exception!(apitask_kg_py, CorpusError, KgError, "Unreadable corpus, snapshot or vector file.");
create_exception!(apitask_kg_py, SearchFailed, KgError, "A query could not be answered.");

fn pipeline_err(e: PipelineError) -> PyErr {
    match e.exit_code() {
        1 => ConfigError::new_err(e.to_string()),
        2 => CorpusError::new_err(e.to_string()),
        _ => KgError::new_err(e.to_string()),
    }
}

fn graph_err(e: GraphError) -> PyErr {
    CorpusError::new_err(e.to_string())
}

fn search_err(e: SearchError) -> PyErr {
    SearchFailed::new_err((e.code(), e.to_string()))
}

/// Serialize to JSON and parse it back with Python's json module.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| KgError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_stage(name: &str) -> PyResult<Stage> {
    Stage::ALL
        .into_iter()
        .find(|s| s.as_str() == name)
        .ok_or_else(|| ConfigError::new_err(format!("unknown stage {name:?}")))
}

/// ⟨name, container, parameter count⟩ packet used for API matching.
#[pyclass(module = "apitask_kg_py", eq, frozen, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct ApiPacket {
    inner: CorePacket,
}

#[pymethods]
impl ApiPacket {
    #[new]
    #[pyo3(signature = (name, container=None, param_count=None))]
    fn new(name: String, container: Option<String>, param_count: Option<u32>) -> Self {
        ApiPacket {
            inner: CorePacket::new(name, container.as_deref(), param_count),
        }
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name.clone()
    }

    #[getter]
    fn container(&self) -> Option<String> {
        self.inner.container.clone()
    }

    #[getter]
    fn param_count(&self) -> Option<u32> {
        self.inner.param_count
    }

    /// Whether this query packet matches a candidate packet.
    fn matches(&self, candidate: &ApiPacket) -> bool {
        self.inner.matches(&candidate.inner)
    }

    fn __repr__(&self) -> String {
        format!("ApiPacket{}", self.inner)
    }
}

#[pyclass(module = "apitask_kg_py", frozen)]
pub struct KnowledgeGraph {
    inner: CoreGraph,
}

#[pymethods]
impl KnowledgeGraph {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        CoreGraph::load(&path).map(|inner| KnowledgeGraph { inner }).map_err(graph_err)
    }

    #[staticmethod]
    fn from_snapshot(text: &str) -> PyResult<Self> {
        CoreGraph::from_snapshot_str(text).map(|inner| KnowledgeGraph { inner }).map_err(graph_err)
    }

    fn to_snapshot(&self) -> String {
        self.inner.to_snapshot_string()
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn node_ids(&self) -> Vec<String> {
        self.inner.nodes().map(|n| n.id.clone()).collect()
    }

    /// The node as a dict, or None.
    fn node<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.inner.node(id).map(|n| to_py(py, n)).transpose()
    }

    /// (src, dst, label) of every edge.
    fn edges(&self) -> Vec<(String, String, String)> {
        self.inner.edges().map(|e| (e.src, e.dst, e.label.as_str().to_string())).collect()
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &GraphStats::of(&self.inner))
    }
}

/// Staged build driven by a TOML configuration file.
#[pyclass(module = "apitask_kg_py", unsendable)]
pub struct Pipeline {
    inner: CorePipeline,
}

#[pymethods]
impl Pipeline {
    #[new]
    #[pyo3(signature = (config, out_dir=None))]
    fn new(config: PathBuf, out_dir: Option<String>) -> PyResult<Self> {
        let mut cfg = PipelineConfig::load(&config).map_err(pipeline_err)?;
        if let Some(dir) = out_dir {
            cfg.file.output.dir = dir;
            cfg.file.output.snapshot = None;
        }
        CorePipeline::new(cfg).map(|inner| Pipeline { inner }).map_err(pipeline_err)
    }

    /// Run one stage by name ("build-api", ..., "enrich"); returns its counts.
    fn run<'py>(&self, py: Python<'py>, stage: &str) -> PyResult<Bound<'py, PyAny>> {
        let summary = self.inner.run(parse_stage(stage)?).map_err(pipeline_err)?;
        to_py(py, &summary.counts)
    }

    /// Run every stage; returns the snapshot path.
    fn run_all(&self) -> PyResult<PathBuf> {
        self.inner.run_all().map_err(pipeline_err)?;
        Ok(self.inner.cfg.snapshot_path())
    }

    #[getter]
    fn snapshot_path(&self) -> PathBuf {
        self.inner.cfg.snapshot_path()
    }

    fn engine(&self) -> PyResult<SearchEngine> {
        self.inner.engine(None, None).map(|inner| SearchEngine { inner }).map_err(pipeline_err)
    }
}

#[pyclass(module = "apitask_kg_py", frozen)]
pub struct SearchEngine {
    inner: CoreEngine,
}

#[pymethods]
impl SearchEngine {
    /// Open a snapshot and vector file, with resources from `config` when
    /// given.
    #[staticmethod]
    #[pyo3(signature = (snapshot, vectors, config=None))]
    fn open(snapshot: PathBuf, vectors: PathBuf, config: Option<PathBuf>) -> PyResult<Self> {
        let cfg = config.map(|c| PipelineConfig::load(&c)).transpose().map_err(pipeline_err)?;
        open_engine(cfg.as_ref(), &snapshot, &vectors)
            .map(|inner| SearchEngine { inner })
            .map_err(pipeline_err)
    }

    fn search_text<'py>(&self, py: Python<'py>, query: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = self.inner.search_text(query).map_err(search_err)?;
        to_py(py, &r)
    }

    fn search_code<'py>(&self, py: Python<'py>, code: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = self.inner.search_code(code).map_err(search_err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (id, radius=None, budget=None))]
    fn fragment<'py>(&self, py: Python<'py>, id: &str, radius: Option<usize>, budget: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let f = self
            .inner
            .fragment(id, radius.unwrap_or(self.inner.config.radius), budget.unwrap_or(self.inner.config.budget))
            .map_err(search_err)?;
        to_py(py, &f)
    }

    fn graph(&self) -> KnowledgeGraph {
        KnowledgeGraph {
            inner: self.inner.graph().clone(),
        }
    }
}

/// Mean of |A∩B|/|A| and |A∩B|/|B|; 0 when either set is empty.
#[pyfunction]
fn overlap_score(a: BTreeSet<String>, b: BTreeSet<String>) -> f64 {
    apitask_kg::enrich_task::overlap_score(&a, &b)
}

#[pymodule]
fn apitask_kg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<ApiPacket>()?;
    m.add_class::<KnowledgeGraph>()?;
    m.add_class::<Pipeline>()?;
    m.add_class::<SearchEngine>()?;
    m.add_function(wrap_pyfunction!(overlap_score, m)?)?;
    let py = m.py();
    m.add("KgError", py.get_type::<KgError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("CorpusError", py.get_type::<CorpusError>())?;
    m.add("SearchFailed", py.get_type::<SearchFailed>())?;
    Ok(())
}
