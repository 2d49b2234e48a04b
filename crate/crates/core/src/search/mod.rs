//! Text and code search over the fused graph.
//!
//! A text query is reduced to an optional ⟨action, object⟩ task phrase
//! plus API mentions. Every task is ranked by its align score against the
//! query phrase; mentions are linked to API entities. A code query is
//! reduced to the API packets of its calls; tasks fused to the linked
//! entities are ranked by the overlap of API sets. Both return the
//! semantic relations around the result anchors and a bounded graph
//! fragment.
//!
//! Result documents serialize with stable field names:
//!
//! ```text
//! { query, best_task: {task, score}?, related_tasks: [{task, relation, score}],
//!   api_knowledge: [{entity, provenance}], extended: [{label, src, dst, evidence}],
//!   fragment: {anchors, nodes: [{id, family, display}], edges: [{src, dst, label}]} }
//! ```

mod fragment;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fragment::{assemble_fragment, FragmentEdge, GraphFragment, NodeRef};

use crate::apikg::ApiEntity;
use crate::enrich_task::{overlap_score, TaskScorer};
use crate::fusion::{ApiPacketIndex, EmbeddingModel, Linker};
use crate::graphstore::{Direction, GraphError, KnowledgeGraph, Label, Node, ATTR_SEPARATOR};
use crate::packet::ApiPacket;
use crate::taskkg::{chunk_action_object, code_packets, mention_packet, TaskEntity, TypeTable};
use crate::textproc::{verb_phrases, Mention, TextProcessor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("no task phrase or API mention found in {query:?}")]
    UnparsableQuery { query: String },
    #[error("the graph is empty")]
    EmptyGraph,
    #[error("no API could be found in the code")]
    NoApiFound,
    #[error("unknown node {id}")]
    UnknownNode { id: String },
}

impl SearchError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SearchError::UnparsableQuery { .. } => "UnparsableQuery",
            SearchError::EmptyGraph => "EmptyGraph",
            SearchError::NoApiFound => "NoApiFound",
            SearchError::UnknownNode { .. } => "UnknownNode",
        }
    }
}

impl From<GraphError> for SearchError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownNode { id } => SearchError::UnknownNode { id },
            other => SearchError::UnknownNode { id: other.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub lead_ins: Vec<String>,
    pub radius: usize,
    pub budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            lead_ins: crate::resources::LexicalLists::shipped().query_lead_ins,
            radius: 2,
            budget: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedQuery {
    pub task: Option<(String, String)>,
    pub mentions: Vec<Mention>,
    /// The query without its lead-in.
    pub text: String,
}

fn strip_lead_in<'a>(q: &'a str, lead_ins: &[String]) -> &'a str {
    let q = q.trim();
    let lower = q.to_lowercase();
    let mut best: Option<usize> = None;
    for l in lead_ins {
        let l = l.to_lowercase();
        if lower.starts_with(&l) && lower[l.len()..].chars().next().is_none_or(|c| !c.is_alphanumeric()) {
            best = best.max(Some(l.len()));
        }
    }
    match best {
        Some(n) if lower.len() == q.len() => q[n..].trim_start(),
        _ => q,
    }
}

/// Strip a lead-in, chunk the first verb phrase that yields an action and
/// an object, and detect API mentions.
pub fn parse_text_query(tp: &TextProcessor, q: &str, lead_ins: &[String]) -> Result<ParsedQuery, SearchError> {
    let rest = strip_lead_in(q, lead_ins).trim_end_matches(['?', '.', '!']).trim();
    let unparsable = || SearchError::UnparsableQuery { query: q.to_string() };
    if rest.is_empty() {
        return Err(unparsable());
    }
    let mut task = None;
    let mut mentions = Vec::new();
    for s in tp.sentences(rest) {
        if task.is_none() {
            task = verb_phrases(&s.tokens).iter().find_map(|vp| chunk_action_object(vp).ok());
        }
        mentions.extend(tp.detect_api_mentions(&s, None));
    }
    if task.is_none() && mentions.is_empty() {
        return Err(unparsable());
    }
    Ok(ParsedQuery {
        task,
        mentions,
        text: rest.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTask {
    pub task: TaskEntity,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelatedTask {
    pub task: TaskEntity,
    pub relation: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiKnowledge {
    pub entity: ApiEntity,
    /// `mention`, `code` or `fused`.
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedKnowledge {
    pub label: String,
    pub src: NodeRef,
    pub dst: NodeRef,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub query: String,
    pub best_task: Option<ScoredTask>,
    pub related_tasks: Vec<RelatedTask>,
    pub api_knowledge: Vec<ApiKnowledge>,
    pub extended: Vec<ExtendedKnowledge>,
    pub fragment: GraphFragment,
}

/// Relation kind used for tasks found through shared API usage.
pub const API_USAGE: &str = "api_usage";

/// Immutable search state: the graph, the model and the derived indexes.
/// Shareable across threads.
pub struct SearchEngine {
    graph: KnowledgeGraph,
    model: EmbeddingModel,
    tp: TextProcessor,
    index: ApiPacketIndex,
    types: TypeTable,
    code_keywords: Vec<String>,
    pub config: SearchConfig,
}

fn related_label(l: Label) -> bool {
    l.is_task_declaration() || l.is_task_semantic()
}

impl SearchEngine {
    pub fn new(graph: KnowledgeGraph, model: EmbeddingModel, tp: TextProcessor, code_keywords: Vec<String>, config: SearchConfig) -> Self {
        let index = ApiPacketIndex::from_graph(&graph);
        let types = TypeTable::from_entities(graph.api_entities());
        SearchEngine {
            graph,
            model,
            tp,
            index,
            types,
            code_keywords,
            config,
        }
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn model(&self) -> &EmbeddingModel {
        &self.model
    }

    pub fn text_processor(&self) -> &TextProcessor {
        &self.tp
    }

    fn linker(&self) -> Linker<'_> {
        Linker {
            tp: &self.tp,
            index: &self.index,
            model: &self.model,
        }
    }

    pub fn parse(&self, q: &str) -> Result<ParsedQuery, SearchError> {
        parse_text_query(&self.tp, q, &self.config.lead_ins)
    }

    /// Packet of a query mention. A bare method mention is qualified with
    /// a type mentioned in the same query when that type declares it.
    fn query_packet(&self, mention: &Mention, others: &[Mention]) -> ApiPacket {
        let mut packet = mention_packet(&mention.text, None, &[], &self.types);
        if packet.container.is_none() && packet.name.as_deref().is_some_and(|n| n.ends_with("()")) {
            for o in others {
                let Some(ty) = self.types.resolve(&o.text) else { continue };
                let q = ApiPacket {
                    container: Some(ty.to_string()),
                    ..packet.clone()
                };
                if !self.index.candidates(&q).is_empty() {
                    packet = q;
                    break;
                }
            }
        }
        packet
    }

    pub fn search_text(&self, q: &str) -> Result<SearchResult, SearchError> {
        if self.graph.node_count() == 0 {
            return Err(SearchError::EmptyGraph);
        }
        let parsed = self.parse(q)?;
        let linker = self.linker();
        let scorer = TaskScorer {
            tp: &self.tp,
            graph: &self.graph,
            linker: &linker,
            types: &self.types,
            code_keywords: &self.code_keywords,
        };

        let best_task = parsed.task.as_ref().and_then(|(action, object)| {
            let mut best: Option<(&TaskEntity, f64)> = None;
            for t in self.graph.tasks() {
                let score = scorer.align_score(action, object, &t.action, &t.object).total();
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((t, score));
                }
            }
            best.map(|(t, score)| ScoredTask { task: t.clone(), score })
        });

        let mut knowledge = Knowledge::default();
        for m in &parsed.mentions {
            let packet = self.query_packet(m, &parsed.mentions);
            if let Some(l) = linker.link_packet(&packet, &parsed.text) {
                knowledge.add(&self.graph, &l.id, "mention");
            }
        }
        if let Some(b) = &best_task {
            for (e, _) in self.graph.neighbors(&b.task.id, Some(&[Label::FusionLink]), Direction::Out)? {
                knowledge.add(&self.graph, &e.dst, "fused");
            }
        }
        let related = match &best_task {
            Some(b) => self.related_tasks(&b.task.id)?,
            None => Vec::new(),
        };
        self.finish(q, best_task, related, knowledge)
    }

    pub fn search_code(&self, code: &str) -> Result<SearchResult, SearchError> {
        if self.graph.node_count() == 0 {
            return Err(SearchError::EmptyGraph);
        }
        let linker = self.linker();
        let packets = code_packets(code, &self.types, &self.code_keywords);
        let mut knowledge = Knowledge::default();
        let mut query_set = BTreeSet::new();
        for p in &packets {
            if let Some(l) = linker.link_packet(p, "") {
                knowledge.add(&self.graph, &l.id, "code");
                query_set.insert(l.id);
            }
        }
        if query_set.is_empty() {
            return Err(SearchError::NoApiFound);
        }
        let scorer = TaskScorer {
            tp: &self.tp,
            graph: &self.graph,
            linker: &linker,
            types: &self.types,
            code_keywords: &self.code_keywords,
        };

        let mut candidates: BTreeMap<String, f64> = BTreeMap::new();
        for api in &query_set {
            for (e, node) in self.graph.neighbors(api, Some(&[Label::FusionLink]), Direction::In)? {
                let Some(task) = node.as_task() else { continue };
                if candidates.contains_key(&task.id) || e.dst != *api {
                    continue;
                }
                let task_set = scorer
                    .code_api_set(task)
                    .ok()
                    .filter(|s| !s.is_empty())
                    .unwrap_or_else(|| self.fused_set(&task.id));
                candidates.insert(task.id.clone(), overlap_score(&query_set, &task_set));
            }
        }
        let mut ranked: Vec<(String, f64)> = candidates.into_iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let task_of = |id: &str| self.graph.node(id).and_then(Node::as_task).cloned();
        let best_task = ranked.first().and_then(|(id, score)| task_of(id).map(|task| ScoredTask { task, score: *score }));
        let mut related: Vec<RelatedTask> = ranked
            .iter()
            .filter_map(|(id, score)| {
                task_of(id).map(|task| RelatedTask {
                    task,
                    relation: API_USAGE.to_string(),
                    score: *score,
                })
            })
            .collect();
        if let Some(b) = &best_task {
            for r in self.related_tasks(&b.task.id)? {
                if !related.iter().any(|x| x.task.id == r.task.id && x.relation == r.relation) {
                    related.push(r);
                }
            }
        }
        sort_related(&mut related);
        self.finish(code, best_task, related, knowledge)
    }

    fn fused_set(&self, task: &str) -> BTreeSet<String> {
        self.graph
            .neighbors(task, Some(&[Label::FusionLink]), Direction::Out)
            .map(|ns| ns.into_iter().map(|(e, _)| e.dst).collect())
            .unwrap_or_default()
    }

    /// Tasks joined to `id` by task relations; declaration relations score
    /// 1, semantic ones their stored score.
    pub fn related_tasks(&self, id: &str) -> Result<Vec<RelatedTask>, SearchError> {
        let mut out = Vec::new();
        for (e, node) in self.graph.neighbors(id, None, Direction::Both)? {
            if !related_label(e.label) {
                continue;
            }
            let Some(task) = node.as_task() else { continue };
            let score = if e.label.is_task_semantic() {
                e.attrs.get("score").and_then(|s| s.parse::<f64>().ok()).unwrap_or(0.0)
            } else {
                1.0
            };
            out.push(RelatedTask {
                task: task.clone(),
                relation: e.label.as_str().to_string(),
                score,
            });
        }
        sort_related(&mut out);
        Ok(out)
    }

    fn finish(&self, query: &str, best_task: Option<ScoredTask>, related_tasks: Vec<RelatedTask>, knowledge: Knowledge) -> Result<SearchResult, SearchError> {
        let mut anchors: Vec<String> = best_task.iter().map(|b| b.task.id.clone()).collect();
        anchors.extend(knowledge.items.iter().map(|k| k.entity.id.clone()));
        let extended = self.extended(&anchors)?;
        let fragment = assemble_fragment(&self.graph, &anchors, self.config.radius, self.config.budget)?;
        Ok(SearchResult {
            query: query.to_string(),
            best_task,
            related_tasks,
            api_knowledge: knowledge.items,
            extended,
            fragment,
        })
    }

    /// Semantic relations incident to any anchor, in edge order.
    pub fn extended(&self, anchors: &[String]) -> Result<Vec<ExtendedKnowledge>, SearchError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for a in anchors {
            for (e, _) in self.graph.neighbors(a, None, Direction::Both)? {
                if !e.label.is_semantic() || !seen.insert(e.key()) {
                    continue;
                }
                let node_ref = |id: &str| self.graph.node(id).map(NodeRef::of);
                let (Some(src), Some(dst)) = (node_ref(&e.src), node_ref(&e.dst)) else { continue };
                out.push(ExtendedKnowledge {
                    label: e.label.as_str().to_string(),
                    src,
                    dst,
                    evidence: e
                        .attrs
                        .get("evidence")
                        .map(|v| v.split(ATTR_SEPARATOR).map(str::to_string).collect())
                        .unwrap_or_default(),
                });
            }
        }
        Ok(out)
    }

    pub fn fragment(&self, id: &str, radius: usize, budget: usize) -> Result<GraphFragment, SearchError> {
        assemble_fragment(&self.graph, &[id.to_string()], radius, budget)
    }
}

fn sort_related(v: &mut [RelatedTask]) {
    v.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.task.id.cmp(&b.task.id))
            .then_with(|| a.relation.cmp(&b.relation))
    });
}

#[derive(Default)]
struct Knowledge {
    items: Vec<ApiKnowledge>,
}

impl Knowledge {
    fn add(&mut self, graph: &KnowledgeGraph, id: &str, provenance: &str) {
        if self.items.iter().any(|k| k.entity.id == id) {
            return;
        }
        if let Some(entity) = graph.node(id).and_then(Node::as_api) {
            self.items.push(ApiKnowledge {
                entity: entity.clone(),
                provenance: provenance.to_string(),
            });
        }
    }
}

#[cfg(test)]
mod tests;
