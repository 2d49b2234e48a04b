//! Staged build driver.
//!
//! A build is described by one TOML file. Relative paths are resolved
//! against the directory holding the file. Example:
//!
//! ```toml
//! [corpus]
//! api_ref = "api"          # directory of API reference pages (*.html)
//! tutorials = "tutorials"  # directory of tutorial pages (*.html)
//! code_tag = "codebox"     # element holding tutorial code snippets
//!
//! [output]
//! dir = "build"            # stage artifacts
//! snapshot = "build/graph.kg"
//!
//! # Optional resource overrides; shipped defaults are used when absent.
//! [resources]
//! # lexicon = "lexicon.tsv"
//! # orthography = "orthography.tsv"
//! # stems = "stems.tsv"
//! # lexical_lists = "lexical.toml"
//! # patterns = "patterns.dsl"
//! # directive_keywords = "directive_keywords.txt"
//! # task_phrases = "task_phrases.tsv"
//!
//! [tasks]
//! classifier = "linear"    # or "rule"
//! threshold = 0.5
//!
//! [embedding]
//! dim = 128
//! epochs = 30
//! seed = 7
//!
//! [enrich]
//! align_threshold = 1.5
//! overlap_threshold = 0.6
//!
//! [search]
//! radius = 2
//! budget = 40
//! ```
//!
//! Stages and their artifacts in the output directory:
//!
//! | stage       | reads                              | writes                                  |
//! |-------------|------------------------------------|-----------------------------------------|
//! | build-api   | API pages                          | `api.kg`, `api.sentences.txt`           |
//! | build-task  | tutorials, `api.kg`                | `task.kg`, `task.sentences.jsonl`       |
//! | train-embed | both sentence files                | `vectors.txt`                           |
//! | fuse        | `api.kg`, `task.kg`, `vectors.txt` | `fused.kg`                              |
//! | enrich      | `fused.kg`, sentences, vectors     | the snapshot                            |
//!
//! Every stage also writes `<stage>.diagnostics.tsv`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::apikg::{ApiGraph, ApiKgError, KeywordSet};
use crate::enrich_api::{add_api_semantic_relations, PatternSet};
use crate::enrich_task::{enrich_tasks, EnrichConfig, EnrichTaskError, TaskScorer};
use crate::fusion::{fuse, train_embeddings, ApiPacketIndex, EmbeddingConfig, EmbeddingError, EmbeddingModel, Linker};
use crate::graphstore::{BuildMetadata, Edge, GraphError, KnowledgeGraph, Label, Node};
use crate::resources::{self, LexicalLists, ResourceError};
use crate::search::{SearchConfig, SearchEngine};
use crate::taskkg::{
    parse_tutorial, DescriptionSentence, LinearClassifier, RuleClassifier, TaskClassifier, TaskExtractor, TaskGraph, TaskLexicon, TypeTable,
};
use crate::textproc::TextProcessor;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("stage {stage} needs {path}; run {needs} first")]
    MissingPrerequisite { stage: Stage, needs: Stage, path: PathBuf },
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("{stage}: {source}")]
    ApiKg {
        stage: Stage,
        #[source]
        source: ApiKgError,
    },
    #[error("{context}: {source}")]
    Graph {
        context: String,
        #[source]
        source: GraphError,
    },
    #[error("{stage}: {source}")]
    Embedding {
        stage: Stage,
        #[source]
        source: EmbeddingError,
    },
    #[error("{stage}: {source}")]
    EnrichTask {
        stage: Stage,
        #[source]
        source: EnrichTaskError,
    },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// 1 user/config error, 2 corpus error, 3 internal error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Resource(_) | PipelineError::MissingPrerequisite { .. } => 1,
            PipelineError::EnrichTask {
                source: EnrichTaskError::Config(_),
                ..
            } => 1,
            PipelineError::Corpus(_) | PipelineError::ApiKg { .. } => 2,
            PipelineError::Embedding {
                source: EmbeddingError::EmptyCorpus,
                ..
            } => 2,
            PipelineError::Graph {
                source: GraphError::CorruptSnapshot { .. } | GraphError::VersionMismatch { .. },
                ..
            } => 2,
            PipelineError::Embedding {
                source: EmbeddingError::Format { .. },
                ..
            } => 2,
            _ => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    BuildApi,
    BuildTask,
    TrainEmbed,
    Fuse,
    Enrich,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::BuildApi, Stage::BuildTask, Stage::TrainEmbed, Stage::Fuse, Stage::Enrich];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::BuildApi => "build-api",
            Stage::BuildTask => "build-task",
            Stage::TrainEmbed => "train-embed",
            Stage::Fuse => "fuse",
            Stage::Enrich => "enrich",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Linear,
    Rule,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub api_ref: String,
    pub tutorials: String,
    #[serde(default = "default_code_tag")]
    pub code_tag: String,
}

fn default_code_tag() -> String {
    "codebox".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    pub snapshot: Option<String>,
}

fn default_dir() -> String {
    "build".to_string()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir(), snapshot: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSection {
    pub lexicon: Option<String>,
    pub orthography: Option<String>,
    pub stems: Option<String>,
    pub lexical_lists: Option<String>,
    pub patterns: Option<String>,
    pub directive_keywords: Option<String>,
    pub task_phrases: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    #[serde(default)]
    pub classifier: ClassifierKind,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

impl Default for TaskSection {
    fn default() -> Self {
        TaskSection {
            classifier: ClassifierKind::Linear,
            threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    pub lead_ins: Option<Vec<String>>,
}

fn default_radius() -> usize {
    2
}

fn default_budget() -> usize {
    40
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            radius: default_radius(),
            budget: default_budget(),
            lead_ins: None,
        }
    }
}

/// The configuration file as written. Its canonical TOML form is what
/// the config hash covers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub corpus: CorpusSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub resources: ResourceSection,
    #[serde(default)]
    pub tasks: TaskSection,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub enrich: EnrichConfig,
    #[serde(default)]
    pub search: SearchSection,
}

/// A validated configuration with absolute paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub file: ConfigFile,
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(PipelineConfig {
            file,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn api_ref_dir(&self) -> PathBuf {
        self.resolve(&self.file.corpus.api_ref)
    }

    pub fn tutorials_dir(&self) -> PathBuf {
        self.resolve(&self.file.corpus.tutorials)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.file.output.dir)
    }

    pub fn snapshot_path(&self) -> PathBuf {
        match &self.file.output.snapshot {
            Some(s) => self.resolve(s),
            None => self.output_dir().join("graph.kg"),
        }
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.output_dir().join(name)
    }

    fn resource(&self, p: &Option<String>) -> Option<PathBuf> {
        p.as_deref().map(|p| self.resolve(p))
    }

    /// Check that corpus directories and resource files exist and that
    /// thresholds are in range.
    pub fn validate(&self) -> Result<(), PipelineError> {
        for dir in [self.api_ref_dir(), self.tutorials_dir()] {
            if !dir.is_dir() {
                return Err(PipelineError::Config(format!("corpus directory {} does not exist", dir.display())));
            }
        }
        let r = &self.file.resources;
        for p in [&r.lexicon, &r.orthography, &r.stems, &r.lexical_lists, &r.patterns, &r.directive_keywords, &r.task_phrases] {
            if let Some(path) = self.resource(p) {
                if !path.is_file() {
                    return Err(PipelineError::Config(format!("resource file {} does not exist", path.display())));
                }
            }
        }
        self.file
            .enrich
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let t = self.file.tasks.threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(PipelineError::Config(format!("tasks.threshold {t} is outside [0, 1]")));
        }
        if self.file.embedding.dim == 0 || self.file.embedding.window == 0 {
            return Err(PipelineError::Config("embedding dim and window must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML form. The output section is left out:
    /// where artifacts go does not change what they contain.
    pub fn config_hash(&self) -> String {
        let mut file = self.file.clone();
        file.output = OutputSection::default();
        let canonical = toml::to_string(&file).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn search_config(&self, lists: &LexicalLists) -> SearchConfig {
        SearchConfig {
            lead_ins: self.file.search.lead_ins.clone().unwrap_or_else(|| lists.query_lead_ins.clone()),
            radius: self.file.search.radius,
            budget: self.file.search.budget,
        }
    }
}

/// `*.html` files of a directory sorted by name, as (file stem, content).
pub fn read_pages(dir: &Path) -> Result<Vec<(String, String)>, PipelineError> {
    let entries = std::fs::read_dir(dir).map_err(|e| PipelineError::Corpus(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "html" || x == "htm"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let html = std::fs::read_to_string(&p).map_err(|e| PipelineError::Corpus(format!("cannot read {}: {e}", p.display())))?;
            Ok((id, html))
        })
        .collect()
}

/// SHA-256 over the names and contents of every corpus page.
pub fn corpus_hash(api: &[(String, String)], tutorials: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (tag, pages) in [("api", api), ("tutorial", tutorials)] {
        for (id, html) in pages {
            h.update(format!("{tag}\0{id}\0{}\0", html.len()).as_bytes());
            h.update(html.as_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Counts reported after a stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: Stage,
    pub artifacts: Vec<PathBuf>,
    pub counts: BTreeMap<String, usize>,
    pub diagnostics: usize,
}

impl fmt::Display for StageSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.stage)?;
        for (k, v) in &self.counts {
            writeln!(f, "  {k}: {v}")?;
        }
        writeln!(f, "  diagnostics: {}", self.diagnostics)?;
        for a in &self.artifacts {
            writeln!(f, "  wrote {}", a.display())?;
        }
        Ok(())
    }
}

/// Loaded resources shared by the stages.
pub struct Resources {
    pub tp: TextProcessor,
    pub lists: LexicalLists,
    pub patterns: PatternSet,
    pub directive_keywords: KeywordSet,
    pub classifier: Box<dyn TaskClassifier>,
}

impl Resources {
    pub fn load(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let r = &cfg.file.resources;
        let lists = LexicalLists::load(cfg.resource(&r.lexical_lists).as_deref())?;
        let tp = TextProcessor::from_files(
            cfg.resource(&r.lexicon).as_deref(),
            cfg.resource(&r.orthography).as_deref(),
            cfg.resource(&r.stems).as_deref(),
            &lists,
        )?;
        let patterns = PatternSet::load(cfg.resource(&r.patterns).as_deref())?;
        let directive_keywords = match cfg.resource(&r.directive_keywords) {
            Some(p) => KeywordSet::parse(&resources::read(&p)?, &p.display().to_string())?,
            None => KeywordSet::shipped(),
        };
        let classifier: Box<dyn TaskClassifier> = match cfg.file.tasks.classifier {
            ClassifierKind::Rule => Box::new(RuleClassifier::new(lists.action_verbs.clone())),
            ClassifierKind::Linear => match cfg.resource(&r.task_phrases) {
                Some(p) => {
                    let examples = LinearClassifier::parse_labeled(&resources::read(&p)?, &p.display().to_string())?;
                    Box::new(LinearClassifier::train(&tp, &examples))
                }
                None => Box::new(LinearClassifier::shipped(&tp)),
            },
        };
        Ok(Resources {
            tp,
            lists,
            patterns,
            directive_keywords,
            classifier,
        })
    }
}

const API_KG: &str = "api.kg";
const API_SENTENCES: &str = "api.sentences.txt";
const TASK_KG: &str = "task.kg";
const TASK_SENTENCES: &str = "task.sentences.jsonl";
const VECTORS: &str = "vectors.txt";
const FUSED_KG: &str = "fused.kg";

/// Runs stages against one configuration.
pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub res: Resources,
}

fn write(path: &Path, content: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, content).map_err(io_err(path))
}

fn diagnostics_text(rows: &[String]) -> String {
    rows.iter().map(|r| format!("{r}\n")).collect()
}

fn graph_err(context: &Path) -> impl FnOnce(GraphError) -> PipelineError + '_ {
    move |source| PipelineError::Graph {
        context: context.display().to_string(),
        source,
    }
}

fn family_counts(g: &KnowledgeGraph) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    counts.insert("api_entities".to_string(), g.api_entities().count());
    counts.insert("task_entities".to_string(), g.tasks().count());
    for (label, n) in g.label_counts() {
        counts.insert(format!("edges.{label}"), n);
    }
    counts
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let res = Resources::load(&cfg)?;
        Ok(Pipeline { cfg, res })
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        Self::new(PipelineConfig::load(path)?)
    }

    fn require(&self, stage: Stage, needs: Stage, name: &str) -> Result<PathBuf, PipelineError> {
        let path = self.cfg.artifact(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(PipelineError::MissingPrerequisite { stage, needs, path })
        }
    }

    fn metadata(&self) -> Result<BuildMetadata, PipelineError> {
        let api = read_pages(&self.cfg.api_ref_dir())?;
        let tutorials = read_pages(&self.cfg.tutorials_dir())?;
        Ok(BuildMetadata {
            corpus_hash: corpus_hash(&api, &tutorials),
            config_hash: self.cfg.config_hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    fn load_graph(path: &Path) -> Result<KnowledgeGraph, PipelineError> {
        KnowledgeGraph::load(path).map_err(graph_err(path))
    }

    fn save_graph(g: &KnowledgeGraph, path: &Path) -> Result<(), PipelineError> {
        write(path, &g.to_snapshot_string())
    }

    fn load_model(&self, stage: Stage) -> Result<EmbeddingModel, PipelineError> {
        let path = self.require(stage, Stage::TrainEmbed, VECTORS)?;
        EmbeddingModel::load(&path).map_err(|source| PipelineError::Embedding { stage, source })
    }

    fn load_task_sentences(&self, stage: Stage) -> Result<Vec<DescriptionSentence>, PipelineError> {
        let path = self.require(stage, Stage::BuildTask, TASK_SENTENCES)?;
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        text.lines()
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| PipelineError::Corpus(format!("{}:{}: {e}", path.display(), i + 1)))
            })
            .collect()
    }

    pub fn run(&self, stage: Stage) -> Result<StageSummary, PipelineError> {
        match stage {
            Stage::BuildApi => self.build_api(),
            Stage::BuildTask => self.build_task(),
            Stage::TrainEmbed => self.train_embed(),
            Stage::Fuse => self.fuse(),
            Stage::Enrich => self.enrich(),
        }
    }

    /// Every stage in order.
    pub fn run_all(&self) -> Result<Vec<StageSummary>, PipelineError> {
        Stage::ALL.iter().map(|&s| self.run(s)).collect()
    }

    pub fn build_api(&self) -> Result<StageSummary, PipelineError> {
        let stage = Stage::BuildApi;
        let pages = read_pages(&self.cfg.api_ref_dir())?;
        if pages.is_empty() {
            return Err(PipelineError::Corpus(format!("no API pages in {}", self.cfg.api_ref_dir().display())));
        }
        let api = ApiGraph::build(&pages, &self.res.tp, &self.res.directive_keywords).map_err(|source| PipelineError::ApiKg { stage, source })?;
        let mut g = KnowledgeGraph::new();
        g.metadata = self.metadata()?;
        let out = self.cfg.artifact(API_KG);
        for e in api.entities.values() {
            g.put_node(Node::api(e.clone())).map_err(graph_err(&out))?;
        }
        for r in &api.relations {
            g.put_edge(Edge::new(&r.src, &r.dst, Label::from(r.kind))).map_err(graph_err(&out))?;
        }
        Self::save_graph(&g, &out)?;
        let sentences = self.cfg.artifact(API_SENTENCES);
        let lines: Vec<String> = api.sentences.iter().map(|s| s.replace(['\n', '\r'], " ")).collect();
        write(&sentences, &diagnostics_text(&lines))?;
        let diags = self.cfg.artifact("build-api.diagnostics.tsv");
        write(&diags, &diagnostics_text(&api.diagnostics))?;
        let mut counts = family_counts(&g);
        counts.insert("pages".into(), pages.len());
        counts.insert("sentences".into(), lines.len());
        Ok(StageSummary {
            stage,
            artifacts: vec![out, sentences, diags],
            counts,
            diagnostics: api.diagnostics.len(),
        })
    }

    pub fn build_task(&self) -> Result<StageSummary, PipelineError> {
        let stage = Stage::BuildTask;
        let api_path = self.require(stage, Stage::BuildApi, API_KG)?;
        let api = Self::load_graph(&api_path)?;
        let pages = read_pages(&self.cfg.tutorials_dir())?;
        if pages.is_empty() {
            return Err(PipelineError::Corpus(format!("no tutorial pages in {}", self.cfg.tutorials_dir().display())));
        }
        let code_tag = &self.cfg.file.corpus.code_tag;
        let docs: Vec<_> = pages.iter().map(|(id, html)| parse_tutorial(id, html, code_tag)).collect();
        let types = TypeTable::from_entities(api.api_entities());
        let lexicon = TaskLexicon::from_lists(&self.res.lists);
        let extractor = TaskExtractor {
            tp: &self.res.tp,
            classifier: self.res.classifier.as_ref(),
            threshold: self.cfg.file.tasks.threshold,
            types: &types,
            lexicon: &lexicon,
        };
        let tg = TaskGraph::build(&docs, &extractor);
        let out = self.cfg.artifact(TASK_KG);
        let mut g = KnowledgeGraph::new();
        g.metadata = self.metadata()?;
        for t in tg.tasks.values() {
            g.put_node(Node::task(t.clone())).map_err(graph_err(&out))?;
        }
        for r in &tg.relations {
            g.put_edge(Edge::new(&r.src, &r.dst, Label::from(r.kind))).map_err(graph_err(&out))?;
        }
        Self::save_graph(&g, &out)?;
        let sentences = self.cfg.artifact(TASK_SENTENCES);
        let lines: Vec<String> = tg
            .sentences
            .iter()
            .map(|s| serde_json::to_string(s).expect("sentences serialize"))
            .collect();
        write(&sentences, &diagnostics_text(&lines))?;
        let diags = self.cfg.artifact("build-task.diagnostics.tsv");
        let untasked: Vec<String> = docs
            .iter()
            .filter(|d| !tg.tasks.values().any(|t| t.source.split('#').next() == Some(d.id.as_str())))
            .map(|d| format!("no_tasks\t{}", d.id))
            .collect();
        write(&diags, &diagnostics_text(&untasked))?;
        let mut counts = family_counts(&g);
        counts.insert("pages".into(), pages.len());
        counts.insert("sentences".into(), lines.len());
        Ok(StageSummary {
            stage,
            artifacts: vec![out, sentences, diags],
            counts,
            diagnostics: untasked.len(),
        })
    }

    pub fn train_embed(&self) -> Result<StageSummary, PipelineError> {
        let stage = Stage::TrainEmbed;
        let api_path = self.require(stage, Stage::BuildApi, API_SENTENCES)?;
        let mut corpus: Vec<String> = std::fs::read_to_string(&api_path)
            .map_err(io_err(&api_path))?
            .lines()
            .map(str::to_string)
            .collect();
        corpus.extend(self.load_task_sentences(stage)?.into_iter().map(|s| s.sentence.raw));
        let model = train_embeddings(&self.res.tp, &corpus, &self.cfg.file.embedding).map_err(|source| PipelineError::Embedding { stage, source })?;
        let out = self.cfg.artifact(VECTORS);
        write(&out, &model.to_text())?;
        let diags = self.cfg.artifact("train-embed.diagnostics.tsv");
        write(&diags, "")?;
        let mut counts = BTreeMap::new();
        counts.insert("sentences".into(), corpus.len());
        counts.insert("vocabulary".into(), model.vocab().len());
        Ok(StageSummary {
            stage,
            artifacts: vec![out, diags],
            counts,
            diagnostics: 0,
        })
    }

    pub fn fuse(&self) -> Result<StageSummary, PipelineError> {
        let stage = Stage::Fuse;
        let api_path = self.require(stage, Stage::BuildApi, API_KG)?;
        let task_path = self.require(stage, Stage::BuildTask, TASK_KG)?;
        let model = self.load_model(stage)?;
        let mut g = Self::load_graph(&api_path)?;
        let tasks = Self::load_graph(&task_path)?;
        let out = self.cfg.artifact(FUSED_KG);
        for n in tasks.nodes() {
            g.put_node(n.clone()).map_err(graph_err(&out))?;
        }
        for e in tasks.edges() {
            g.put_edge(e).map_err(graph_err(&out))?;
        }
        g.metadata = self.metadata()?;
        let index = ApiPacketIndex::from_graph(&g);
        let linker = Linker {
            tp: &self.res.tp,
            index: &index,
            model: &model,
        };
        let report = fuse(&g, &linker);
        report.apply(&mut g).map_err(graph_err(&out))?;
        Self::save_graph(&g, &out)?;
        let diags = self.cfg.artifact("fuse.diagnostics.tsv");
        write(&diags, &diagnostics_text(&report.diagnostics))?;
        let mut counts = family_counts(&g);
        counts.insert("fusion_links".into(), report.links.len());
        counts.insert("disambiguated".into(), report.links.iter().filter(|l| l.disambiguated).count());
        Ok(StageSummary {
            stage,
            artifacts: vec![out, diags],
            counts,
            diagnostics: report.diagnostics.len(),
        })
    }

    pub fn enrich(&self) -> Result<StageSummary, PipelineError> {
        let stage = Stage::Enrich;
        let fused_path = self.require(stage, Stage::Fuse, FUSED_KG)?;
        let sentences = self.load_task_sentences(stage)?;
        let model = self.load_model(stage)?;
        let mut g = Self::load_graph(&fused_path)?;
        let out = self.cfg.snapshot_path();
        let index = ApiPacketIndex::from_graph(&g);
        let types = TypeTable::from_entities(g.api_entities());
        let linker = Linker {
            tp: &self.res.tp,
            index: &index,
            model: &model,
        };
        let keywords = &self.res.lists.code_keywords;
        let api_report = add_api_semantic_relations(&self.res.tp, &sentences, &self.res.patterns, &linker, &types, keywords);
        // Object comparison follows API relations, semantic ones included.
        api_report.apply(&mut g).map_err(graph_err(&out))?;
        let task_report = {
            let scorer = TaskScorer {
                tp: &self.res.tp,
                graph: &g,
                linker: &linker,
                types: &types,
                code_keywords: keywords,
            };
            enrich_tasks(&scorer, &self.cfg.file.enrich).map_err(|source| PipelineError::EnrichTask { stage, source })?
        };
        task_report.apply(&mut g).map_err(graph_err(&out))?;
        g.metadata = self.metadata()?;
        Self::save_graph(&g, &out)?;
        let diags = self.cfg.artifact("enrich.diagnostics.tsv");
        write(&diags, &diagnostics_text(&api_report.diagnostics))?;
        let mut counts = family_counts(&g);
        counts.insert("api_semantic_relations".into(), api_report.relations.len());
        counts.insert("task_semantic_relations".into(), task_report.relations.len());
        counts.insert("task_pairs_scored".into(), task_report.pairs_scored);
        Ok(StageSummary {
            stage,
            artifacts: vec![out, diags],
            counts,
            diagnostics: api_report.diagnostics.len(),
        })
    }

    /// Search engine over a snapshot (the configured one by default) and
    /// the trained vectors.
    /// Search engine over the snapshot and vectors, by default the ones
    /// this configuration builds.
    pub fn engine(&self, snapshot: Option<&Path>, vectors: Option<&Path>) -> Result<SearchEngine, PipelineError> {
        let snapshot = snapshot.map(Path::to_path_buf).unwrap_or_else(|| self.cfg.snapshot_path());
        let vectors = vectors.map(Path::to_path_buf).unwrap_or_else(|| self.cfg.artifact(VECTORS));
        engine_with(&self.res, self.cfg.search_config(&self.res.lists), &snapshot, &vectors)
    }
}

/// Search engine over a snapshot and a vector file. Resources and search
/// settings come from `cfg` when given, else the shipped defaults; the
/// corpus itself is not needed.
pub fn open_engine(cfg: Option<&PipelineConfig>, snapshot: &Path, vectors: &Path) -> Result<SearchEngine, PipelineError> {
    match cfg {
        Some(cfg) => {
            let res = Resources::load(cfg)?;
            engine_with(&res, cfg.search_config(&res.lists), snapshot, vectors)
        }
        None => {
            let lists = LexicalLists::shipped();
            let tp = TextProcessor::default();
            let search = SearchConfig {
                lead_ins: lists.query_lead_ins.clone(),
                ..SearchConfig::default()
            };
            let (graph, model) = load_index(snapshot, vectors)?;
            Ok(SearchEngine::new(graph, model, tp, lists.code_keywords, search))
        }
    }
}

fn engine_with(res: &Resources, search: SearchConfig, snapshot: &Path, vectors: &Path) -> Result<SearchEngine, PipelineError> {
    let (graph, model) = load_index(snapshot, vectors)?;
    Ok(SearchEngine::new(graph, model, res.tp.clone(), res.lists.code_keywords.clone(), search))
}

fn load_index(snapshot: &Path, vectors: &Path) -> Result<(KnowledgeGraph, EmbeddingModel), PipelineError> {
    for (what, path) in [("snapshot", snapshot), ("vector file", vectors)] {
        if !path.is_file() {
            return Err(PipelineError::Config(format!("{what} {} not found", path.display())));
        }
    }
    let graph = KnowledgeGraph::load(snapshot).map_err(graph_err(snapshot))?;
    let model = EmbeddingModel::load(vectors).map_err(|source| PipelineError::Embedding {
        stage: Stage::TrainEmbed,
        source,
    })?;
    Ok((graph, model))
}

/// Per-family node counts, per-label edge counts, the fusion link count
/// and semantic relation counts per category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub api_entities: usize,
    pub task_entities: usize,
    pub edges: BTreeMap<String, usize>,
    pub fusion_links: usize,
    pub api_semantic: BTreeMap<String, usize>,
    pub task_semantic: BTreeMap<String, usize>,
}

impl GraphStats {
    pub fn of(g: &KnowledgeGraph) -> Self {
        let counts = g.label_counts();
        let count = |l: Label| counts.get(&l).copied().unwrap_or(0);
        let select = |f: fn(Label) -> bool| -> BTreeMap<String, usize> {
            Label::ALL.iter().filter(|l| f(**l)).map(|l| (l.as_str().to_string(), count(*l))).collect()
        };
        GraphStats {
            api_entities: g.api_entities().count(),
            task_entities: g.tasks().count(),
            edges: Label::ALL.iter().map(|l| (l.as_str().to_string(), count(*l))).collect(),
            fusion_links: count(Label::FusionLink),
            api_semantic: select(Label::is_api_semantic),
            task_semantic: select(Label::is_task_semantic),
        }
    }
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes")?;
        writeln!(f, "  Api\t{}", self.api_entities)?;
        writeln!(f, "  Task\t{}", self.task_entities)?;
        writeln!(f, "edges")?;
        for (l, n) in &self.edges {
            writeln!(f, "  {l}\t{n}")?;
        }
        writeln!(f, "fusion links\t{}", self.fusion_links)?;
        writeln!(f, "api semantic relations")?;
        for (l, n) in &self.api_semantic {
            writeln!(f, "  {l}\t{n}")?;
        }
        writeln!(f, "task semantic relations")?;
        for (l, n) in &self.task_semantic {
            writeln!(f, "  {l}\t{n}")?;
        }
        Ok(())
    }
}
