//! Task-align and task-overlap relations.
//!
//! Two tasks align when `act + obj` exceeds the align threshold, where
//! `act` is the embedding similarity of the actions and `obj` compares the
//! objects: through the API graph when both objects name APIs, otherwise by
//! embedding similarity. Two tasks overlap when the mean of
//! `|A1 ∩ A2| / |A1|` and `|A1 ∩ A2| / |A2|` over the API sets of their
//! code exceeds the overlap threshold. Both comparisons are strict.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{sentence_similarity, Linker};
use crate::graphstore::{Direction, Edge, GraphError, KnowledgeGraph, Label};
use crate::taskkg::{code_packets, mention_packet, TaskEntity, TypeTable};
use crate::textproc::TextProcessor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnrichTaskError {
    #[error("task {task} has no code snippet")]
    NoCodeSnippet { task: String },
    #[error("no API of task {task}'s code could be linked")]
    EmptyApiSet { task: String },
    #[error("invalid enrichment config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnrichConfig {
    pub align_threshold: f64,
    pub overlap_threshold: f64,
    /// Score only pairs sharing a head verb stem or a linked API instead
    /// of every pair. Faster on large corpora, at some loss of recall.
    pub blocking: bool,
}

impl Default for EnrichConfig {
    fn default() -> Self {
        EnrichConfig {
            align_threshold: 1.5,
            overlap_threshold: 0.6,
            blocking: false,
        }
    }
}

impl EnrichConfig {
    pub fn validate(&self) -> Result<(), EnrichTaskError> {
        if !(self.align_threshold > 0.0 && self.align_threshold <= 2.0) {
            return Err(EnrichTaskError::Config(format!("align_threshold {} is outside (0, 2]", self.align_threshold)));
        }
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold <= 1.0) {
            return Err(EnrichTaskError::Config(format!("overlap_threshold {} is outside (0, 1]", self.overlap_threshold)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskRelationKind {
    TaskAlign,
    TaskOverlap,
}

impl TaskRelationKind {
    pub fn label(self) -> Label {
        match self {
            TaskRelationKind::TaskAlign => Label::TaskAlign,
            TaskRelationKind::TaskOverlap => Label::TaskOverlap,
        }
    }
}

/// Symmetric; stored with `a < b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSemanticRelation {
    pub a: String,
    pub b: String,
    pub kind: TaskRelationKind,
    pub score: f64,
    pub threshold_used: f64,
}

impl TaskSemanticRelation {
    fn new(x: &str, y: &str, kind: TaskRelationKind, score: f64, threshold_used: f64) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        TaskSemanticRelation {
            a: a.to_string(),
            b: b.to_string(),
            kind,
            score,
            threshold_used,
        }
    }

    pub fn edge(&self) -> Edge {
        Edge::new(&self.a, &self.b, self.kind.label())
            .with_attr("score", format!("{:.6}", self.score))
            .with_attr("threshold", self.threshold_used.to_string())
    }
}

/// Overlap score of two API sets.
pub fn overlap_score(a1: &BTreeSet<String>, a2: &BTreeSet<String>) -> f64 {
    if a1.is_empty() || a2.is_empty() {
        return 0.0;
    }
    let common = a1.intersection(a2).count() as f64;
    (common / a1.len() as f64 + common / a2.len() as f64) / 2.0
}

/// Scoring context: the fused graph, the linker over its API entities and
/// the type table used to resolve mentions.
pub struct TaskScorer<'a> {
    pub tp: &'a TextProcessor,
    pub graph: &'a KnowledgeGraph,
    pub linker: &'a Linker<'a>,
    pub types: &'a TypeTable,
    pub code_keywords: &'a [String],
}

/// The two components of an align score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignScore {
    pub act: f64,
    pub obj: f64,
}

impl AlignScore {
    pub fn total(self) -> f64 {
        self.act + self.obj
    }
}

fn relates_apis(label: Label) -> bool {
    label.is_api_declaration() || label.is_api_semantic()
}

impl TaskScorer<'_> {
    pub fn act_score(&self, a1: &str, a2: &str) -> f64 {
        sentence_similarity(self.tp, a1, a2, self.linker.model)
    }

    /// The API entity an object phrase names, if any.
    pub fn object_api(&self, object: &str) -> Option<Option<String>> {
        let mention = self.tp.fragment_mentions(object).into_iter().next()?;
        let packet = mention_packet(&mention.text, None, &[], self.types);
        Some(self.linker.link_packet(&packet, object).map(|l| l.id))
    }

    pub fn obj_score(&self, o1: &str, o2: &str) -> f64 {
        match (self.object_api(o1), self.object_api(o2)) {
            (Some(l1), Some(l2)) => match (l1, l2) {
                (Some(x), Some(y)) if x == y || self.graph.connected(&x, &y, relates_apis) => 1.0,
                _ => 0.0,
            },
            _ => sentence_similarity(self.tp, o1, o2, self.linker.model),
        }
    }

    pub fn align_score(&self, a1: &str, o1: &str, a2: &str, o2: &str) -> AlignScore {
        AlignScore {
            act: self.act_score(a1, a2),
            obj: self.obj_score(o1, o2),
        }
    }

    pub fn task_align(&self, t1: &TaskEntity, t2: &TaskEntity, cfg: &EnrichConfig) -> Option<TaskSemanticRelation> {
        if t1.id == t2.id {
            return None;
        }
        let score = self.align_score(&t1.action, &t1.object, &t2.action, &t2.object).total();
        (score > cfg.align_threshold)
            .then(|| TaskSemanticRelation::new(&t1.id, &t2.id, TaskRelationKind::TaskAlign, score, cfg.align_threshold))
    }

    /// Linked API entities of a snippet, with `context` as the sentence.
    pub fn snippet_api_set(&self, code: &str, context: &str) -> BTreeSet<String> {
        code_packets(code, self.types, self.code_keywords)
            .iter()
            .filter_map(|p| self.linker.link_packet(p, context).map(|l| l.id))
            .collect()
    }

    pub fn code_api_set(&self, task: &TaskEntity) -> Result<BTreeSet<String>, EnrichTaskError> {
        let code = task.code_snippet.as_deref().ok_or_else(|| EnrichTaskError::NoCodeSnippet { task: task.id.clone() })?;
        let context = [task.code_summary.as_deref(), task.notes.as_deref()]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join(" ");
        Ok(self.snippet_api_set(code, &context))
    }

    pub fn task_overlap(&self, t1: &TaskEntity, t2: &TaskEntity, cfg: &EnrichConfig) -> Result<Option<TaskSemanticRelation>, EnrichTaskError> {
        let a1 = self.code_api_set(t1)?;
        let a2 = self.code_api_set(t2)?;
        if t1.id == t2.id {
            return Ok(None);
        }
        overlap_relation(t1, &a1, t2, &a2, cfg)
    }
}

/// Overlap relation of two tasks with known API sets. Empty sets are an error.
pub fn overlap_relation(
    t1: &TaskEntity,
    a1: &BTreeSet<String>,
    t2: &TaskEntity,
    a2: &BTreeSet<String>,
    cfg: &EnrichConfig,
) -> Result<Option<TaskSemanticRelation>, EnrichTaskError> {
    for (t, a) in [(t1, a1), (t2, a2)] {
        if a.is_empty() {
            return Err(EnrichTaskError::EmptyApiSet { task: t.id.clone() });
        }
    }
    let score = overlap_score(a1, a2);
    Ok((score > cfg.overlap_threshold)
        .then(|| TaskSemanticRelation::new(&t1.id, &t2.id, TaskRelationKind::TaskOverlap, score, cfg.overlap_threshold)))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnrichTaskReport {
    pub relations: Vec<TaskSemanticRelation>,
    pub pairs_scored: usize,
}

impl EnrichTaskReport {
    pub fn apply(&self, graph: &mut KnowledgeGraph) -> Result<(), GraphError> {
        for r in &self.relations {
            graph.put_edge(r.edge())?;
        }
        Ok(())
    }
}

/// Score task pairs of the graph. With `cfg.blocking`, only pairs that
/// share a head verb stem or a linked API are scored.
pub fn enrich_tasks(scorer: &TaskScorer<'_>, cfg: &EnrichConfig) -> Result<EnrichTaskReport, EnrichTaskError> {
    use rayon::prelude::*;
    cfg.validate()?;
    let tasks: Vec<&TaskEntity> = scorer.graph.tasks().collect();

    let code_sets: Vec<Option<BTreeSet<String>>> = tasks
        .par_iter()
        .map(|t| scorer.code_api_set(t).ok().filter(|s| !s.is_empty()))
        .collect();

    let pairs: Vec<(usize, usize)> = if !cfg.blocking {
        (0..tasks.len()).flat_map(|i| (i + 1..tasks.len()).map(move |j| (i, j))).collect()
    } else {
        let mut blocks: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (i, t) in tasks.iter().enumerate() {
            if let Some(verb) = t.action.split_whitespace().next() {
                let verb = verb.to_lowercase();
                blocks.entry(format!("v:{}", scorer.tp.stems().stem(&verb))).or_default().insert(i);
            }
            let fused = scorer
                .graph
                .neighbors(&t.id, Some(&[Label::FusionLink]), Direction::Out)
                .unwrap_or_default();
            for (e, _) in fused {
                blocks.entry(format!("a:{}", e.dst)).or_default().insert(i);
            }
            for api in code_sets[i].iter().flatten() {
                blocks.entry(format!("a:{api}")).or_default().insert(i);
            }
        }
        let mut set = BTreeSet::new();
        for members in blocks.values() {
            let m: Vec<usize> = members.iter().copied().collect();
            for (k, &i) in m.iter().enumerate() {
                for &j in &m[k + 1..] {
                    set.insert((i, j));
                }
            }
        }
        set.into_iter().collect()
    };

    let found: Vec<Vec<TaskSemanticRelation>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut out = Vec::new();
            if let Some(r) = scorer.task_align(tasks[i], tasks[j], cfg) {
                out.push(r);
            }
            if let (Some(a1), Some(a2)) = (&code_sets[i], &code_sets[j]) {
                if let Ok(Some(r)) = overlap_relation(tasks[i], a1, tasks[j], a2, cfg) {
                    out.push(r);
                }
            }
            out
        })
        .collect();
    let mut relations: Vec<TaskSemanticRelation> = found.into_iter().flatten().collect();
    relations.sort_by(|x, y| (&x.a, &x.b, x.kind).cmp(&(&y.a, &y.b, y.kind)));
    Ok(EnrichTaskReport {
        relations,
        pairs_scored: pairs.len(),
    })
}
