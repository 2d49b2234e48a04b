//! Embedded typed property graph holding both entity families, their
//! declaration relations, fusion links and semantic relations, with a
//! canonical line-delimited snapshot format.

mod snapshot;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use snapshot::{FORMAT_VERSION, MAGIC};

use crate::apikg::{ApiEntity, DeclKind};
use crate::taskkg::{TaskDeclKind, TaskEntity};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge {src} -[{label}]-> {dst} has a missing endpoint")]
    DanglingEdge { src: String, dst: String, label: Label },
    #[error("node id {id} already holds a different payload")]
    IdCollision { id: String },
    #[error("unknown node {id}")]
    UnknownNode { id: String },
    #[error("unknown edge label {label:?}")]
    UnknownLabel { label: String },
    #[error("corrupt snapshot at line {line}: {message}")]
    CorruptSnapshot { line: usize, message: String },
    #[error("snapshot format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: String, expected: String },
    #[error("cannot access snapshot {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Api,
    Task,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Api => "Api",
            Family::Task => "Task",
        }
    }
}

macro_rules! labels {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// The closed edge label set. Serializes as its canonical name.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum Label {
            $(#[serde(rename = $name)] $variant),*
        }

        impl Label {
            pub const ALL: &'static [Label] = &[$(Label::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Label::$variant => $name),*
                }
            }
        }

        impl FromStr for Label {
            type Err = GraphError;

            fn from_str(s: &str) -> Result<Self, GraphError> {
                match s {
                    $($name => Ok(Label::$variant),)*
                    _ => Err(GraphError::UnknownLabel { label: s.to_string() }),
                }
            }
        }
    };
}

labels! {
    Contain => "contain",
    Extend => "extend",
    Implement => "implement",
    Throw => "throw",
    HasMethod => "hasMethod",
    HasParameter => "hasParameter",
    HasField => "hasField",
    HasConstructor => "hasConstructor",
    ParentChild => "parent_child",
    Sibling => "sibling",
    Temporal => "temporal",
    FunctionSimilarity => "FunctionSimilarity",
    FunctionOpposite => "FunctionOpposite",
    BehaviorDifference => "BehaviorDifference",
    FunctionReplace => "FunctionReplace",
    FunctionCollaboration => "FunctionCollaboration",
    TypeConversion => "TypeConversion",
    ImplementConstraint => "ImplementConstraint",
    LogicConstraint => "LogicConstraint",
    EfficiencyComparison => "EfficiencyComparison",
    TaskAlign => "TaskAlign",
    TaskOverlap => "TaskOverlap",
    FusionLink => "FusionLink",
}

impl Label {
    /// Labels stored once with `src < dst` and matched from both ends.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Label::Sibling | Label::TaskAlign | Label::TaskOverlap)
    }

    pub fn is_api_declaration(self) -> bool {
        DeclKind::ALL.iter().any(|k| Label::from(*k) == self)
    }

    pub fn is_task_declaration(self) -> bool {
        matches!(self, Label::ParentChild | Label::Sibling | Label::Temporal)
    }

    pub fn is_api_semantic(self) -> bool {
        matches!(
            self,
            Label::FunctionSimilarity
                | Label::FunctionOpposite
                | Label::BehaviorDifference
                | Label::FunctionReplace
                | Label::FunctionCollaboration
                | Label::TypeConversion
                | Label::ImplementConstraint
                | Label::LogicConstraint
                | Label::EfficiencyComparison
        )
    }

    pub fn is_task_semantic(self) -> bool {
        matches!(self, Label::TaskAlign | Label::TaskOverlap)
    }

    pub fn is_semantic(self) -> bool {
        self.is_api_semantic() || self.is_task_semantic()
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Labels order by name so in-memory and on-disk orders agree.
impl Ord for Label {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<DeclKind> for Label {
    fn from(k: DeclKind) -> Self {
        match k {
            DeclKind::Contain => Label::Contain,
            DeclKind::Extend => Label::Extend,
            DeclKind::Implement => Label::Implement,
            DeclKind::Throw => Label::Throw,
            DeclKind::HasMethod => Label::HasMethod,
            DeclKind::HasParameter => Label::HasParameter,
            DeclKind::HasField => Label::HasField,
            DeclKind::HasConstructor => Label::HasConstructor,
        }
    }
}

impl From<TaskDeclKind> for Label {
    fn from(k: TaskDeclKind) -> Self {
        match k {
            TaskDeclKind::ParentChild => Label::ParentChild,
            TaskDeclKind::Sibling => Label::Sibling,
            TaskDeclKind::Temporal => Label::Temporal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "entity")]
pub enum Payload {
    Api(ApiEntity),
    Task(TaskEntity),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub payload: Payload,
}

impl Node {
    pub fn api(e: ApiEntity) -> Self {
        Node {
            id: e.id.clone(),
            payload: Payload::Api(e),
        }
    }

    pub fn task(t: TaskEntity) -> Self {
        Node {
            id: t.id.clone(),
            payload: Payload::Task(t),
        }
    }

    pub fn family(&self) -> Family {
        match self.payload {
            Payload::Api(_) => Family::Api,
            Payload::Task(_) => Family::Task,
        }
    }

    pub fn as_api(&self) -> Option<&ApiEntity> {
        match &self.payload {
            Payload::Api(e) => Some(e),
            Payload::Task(_) => None,
        }
    }

    pub fn as_task(&self) -> Option<&TaskEntity> {
        match &self.payload {
            Payload::Task(t) => Some(t),
            Payload::Api(_) => None,
        }
    }

    /// Short human-readable name.
    pub fn display(&self) -> String {
        match &self.payload {
            Payload::Api(e) => e.qualified_name.clone(),
            Payload::Task(t) => t.phrase.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub src: String,
    pub dst: String,
    pub label: Label,
}

impl EdgeKey {
    /// Canonical key: symmetric labels put the smaller id first.
    pub fn new(src: &str, dst: &str, label: Label) -> Self {
        let (src, dst) = if label.is_symmetric() && dst < src { (dst, src) } else { (src, dst) };
        EdgeKey {
            src: src.to_string(),
            dst: dst.to_string(),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub label: Label,
    pub attrs: BTreeMap<String, String>,
}

impl Edge {
    pub fn new(src: &str, dst: &str, label: Label) -> Self {
        let key = EdgeKey::new(src, dst, label);
        Edge {
            src: key.src,
            dst: key.dst,
            label,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, key: &str, value: impl Into<String>) -> Self {
        self.attrs.insert(key.to_string(), value.into());
        self
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(&self.src, &self.dst, self.label)
    }

    /// The endpoint opposite to `id`.
    pub fn other(&self, id: &str) -> &str {
        if self.src == id {
            &self.dst
        } else {
            &self.src
        }
    }
}

/// Build provenance recorded in snapshots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildMetadata {
    pub corpus_hash: String,
    pub config_hash: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Both,
}

/// Separator used when merging differing values of one edge attribute.
pub const ATTR_SEPARATOR: char = '\n';

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    pub metadata: BuildMetadata,
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<EdgeKey, BTreeMap<String, String>>,
    /// node id → keys of incident edges
    incident: BTreeMap<String, BTreeSet<EdgeKey>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a node; identical re-insertion is a no-op.
    pub fn put_node(&mut self, node: Node) -> Result<(), GraphError> {
        match self.nodes.get(&node.id) {
            Some(existing) if *existing == node => Ok(()),
            Some(_) => Err(GraphError::IdCollision { id: node.id }),
            None => {
                self.incident.entry(node.id.clone()).or_default();
                self.nodes.insert(node.id.clone(), node);
                Ok(())
            }
        }
    }

    /// Insert an edge, merging attributes into an existing edge with the
    /// same (src, dst, label). Differing values of one attribute are kept
    /// as a newline-joined list of distinct values.
    pub fn put_edge(&mut self, edge: Edge) -> Result<(), GraphError> {
        let key = edge.key();
        if !self.nodes.contains_key(&key.src) || !self.nodes.contains_key(&key.dst) {
            return Err(GraphError::DanglingEdge {
                src: key.src,
                dst: key.dst,
                label: key.label,
            });
        }
        let attrs = self.edges.entry(key.clone()).or_default();
        for (k, v) in edge.attrs {
            match attrs.get_mut(&k) {
                None => {
                    attrs.insert(k, v);
                }
                Some(existing) => {
                    let mut values: Vec<&str> = existing.split(ATTR_SEPARATOR).collect();
                    let mut added = false;
                    for part in v.split(ATTR_SEPARATOR) {
                        if !values.contains(&part) {
                            values.push(part);
                            added = true;
                        }
                    }
                    if added {
                        *existing = values.join(&ATTR_SEPARATOR.to_string());
                    }
                }
            }
        }
        self.incident.entry(key.src.clone()).or_default().insert(key.clone());
        self.incident.entry(key.dst.clone()).or_default().insert(key);
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn api_entities(&self) -> impl Iterator<Item = &ApiEntity> {
        self.nodes.values().filter_map(Node::as_api)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskEntity> {
        self.nodes.values().filter_map(Node::as_task)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, key: &EdgeKey) -> Option<Edge> {
        self.edges.get(key).map(|attrs| Edge {
            src: key.src.clone(),
            dst: key.dst.clone(),
            label: key.label,
            attrs: attrs.clone(),
        })
    }

    pub fn has_edge(&self, src: &str, dst: &str, label: Label) -> bool {
        self.edges.contains_key(&EdgeKey::new(src, dst, label))
    }

    /// All edges in canonical (src, dst, label) order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(k, attrs)| Edge {
            src: k.src.clone(),
            dst: k.dst.clone(),
            label: k.label,
            attrs: attrs.clone(),
        })
    }

    /// Incident edges of `id` with the node at the other end, ordered by
    /// (label, other id). Symmetric labels match in every direction.
    pub fn neighbors(
        &self,
        id: &str,
        labels: Option<&[Label]>,
        direction: Direction,
    ) -> Result<Vec<(Edge, &Node)>, GraphError> {
        let keys = self
            .incident
            .get(id)
            .filter(|_| self.nodes.contains_key(id))
            .ok_or_else(|| GraphError::UnknownNode { id: id.to_string() })?;
        let mut out: Vec<(Edge, &Node)> = keys
            .iter()
            .filter(|k| labels.is_none_or(|ls| ls.contains(&k.label)))
            .filter(|k| {
                k.label.is_symmetric()
                    || match direction {
                        Direction::Out => k.src == id,
                        Direction::In => k.dst == id,
                        Direction::Both => true,
                    }
            })
            .filter_map(|k| {
                let edge = self.edge(k)?;
                let other = self.nodes.get(edge.other(id))?;
                Some((edge, other))
            })
            .collect();
        out.sort_by(|a, b| (a.0.label, &a.1.id, &a.0.src).cmp(&(b.0.label, &b.1.id, &b.0.src)));
        Ok(out)
    }

    /// Whether any edge (with a label accepted by `filter`) joins `a` and
    /// `b` in either direction.
    pub fn connected(&self, a: &str, b: &str, filter: impl Fn(Label) -> bool) -> bool {
        self.incident.get(a).is_some_and(|keys| {
            keys.iter()
                .any(|k| filter(k.label) && ((k.src == a && k.dst == b) || (k.src == b && k.dst == a)))
        })
    }

    /// Edge counts per label.
    pub fn label_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for k in self.edges.keys() {
            *counts.entry(k.label).or_insert(0) += 1;
        }
        counts
    }

    /// Every edge endpoint exists and every incidence entry has its edge.
    pub fn check_integrity(&self) -> bool {
        self.edges
            .keys()
            .all(|k| self.nodes.contains_key(&k.src) && self.nodes.contains_key(&k.dst))
            && self
                .incident
                .values()
                .flatten()
                .all(|k| self.edges.contains_key(k))
    }
}
