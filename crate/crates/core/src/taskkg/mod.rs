//! Task know-how graph: ⟨action, object⟩ task entities mined from tutorial
//! headings and list items, their notes, code and API packets, and the
//! parent-child, sibling and temporal relations implied by document
//! structure.
//!
//! Tutorial pages are HTML with `h1`..`h6` headings, `p` paragraphs,
//! `ul`/`ol` lists and a code-box element (default `<codebox>`, with the
//! code HTML-escaped) for snippets.

mod classifier;
pub mod code;
mod extract;
mod packets;
mod tutorial;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classifier::{LinearClassifier, RuleClassifier, TaskClassifier};
pub use code::{CallSite, SnippetResolver, TypeTable};
pub use extract::{
    chunk_action_object, extract_api_packets, extract_task_attributes, extract_task_relations,
    DescriptionSentence, TaskAttributes, TaskExtractor, TaskLexicon,
};
pub use packets::{code_packets, mention_packet};
pub use tutorial::{parse_tutorial, ListItem, TutorialDocument, TutorialSection};

pub use crate::packet::ApiPacket;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaskKgError {
    #[error("empty phrase")]
    EmptyPhrase,
    #[error("no action/object pattern matches {phrase:?}")]
    NoPatternMatch { phrase: String },
}

/// A packet attached to a task together with the sentence it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskApiPacket {
    pub packet: ApiPacket,
    pub sentence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskEntity {
    pub id: String,
    pub action: String,
    pub object: String,
    pub phrase: String,
    pub notes: Option<String>,
    pub code_snippet: Option<String>,
    pub code_summary: Option<String>,
    pub api_packets: Vec<TaskApiPacket>,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskDeclKind {
    ParentChild,
    Sibling,
    Temporal,
}

impl TaskDeclKind {
    pub const ALL: [TaskDeclKind; 3] = [TaskDeclKind::ParentChild, TaskDeclKind::Sibling, TaskDeclKind::Temporal];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskDeclKind::ParentChild => "parent_child",
            TaskDeclKind::Sibling => "sibling",
            TaskDeclKind::Temporal => "temporal",
        }
    }
}

impl fmt::Display for TaskDeclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `sibling` is symmetric and stored with `src < dst`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskDeclRelation {
    pub src: String,
    pub dst: String,
    pub kind: TaskDeclKind,
}

impl TaskDeclRelation {
    pub fn new(a: &str, b: &str, kind: TaskDeclKind) -> Self {
        let (src, dst) = if kind == TaskDeclKind::Sibling && b < a { (b, a) } else { (a, b) };
        TaskDeclRelation {
            src: src.to_string(),
            dst: dst.to_string(),
            kind,
        }
    }
}

/// Tasks of a tutorial corpus.
#[derive(Debug, Clone, Default)]
pub struct TaskGraph {
    pub tasks: BTreeMap<String, TaskEntity>,
    pub relations: BTreeSet<TaskDeclRelation>,
    /// Every tutorial sentence with its code markup and section snippet.
    pub sentences: Vec<DescriptionSentence>,
}

impl TaskGraph {
    pub fn build(docs: &[TutorialDocument], extractor: &TaskExtractor<'_>) -> Self {
        use rayon::prelude::*;
        let parts: Vec<_> = docs.par_iter().map(|d| extractor.extract_document(d)).collect();
        let mut g = TaskGraph::default();
        for (tasks, relations, sentences) in parts {
            for t in tasks {
                g.tasks.insert(t.id.clone(), t);
            }
            g.relations.extend(relations);
            g.sentences.extend(sentences);
        }
        g
    }
}

#[cfg(test)]
mod tests;
