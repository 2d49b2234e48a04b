//! API know-what graph: entities and declaration relations parsed from API
//! reference pages, with function and directive sentence attributes.
//!
//! Page format (one HTML file per type):
//!
//! ```html
//! <div class="type-header" data-kind="interface" data-package="java.util" data-name="List"></div>
//! <ul class="extends"><li>java.util.Collection</li></ul>
//! <ul class="implements"><li>...</li></ul>
//! <div class="type-description"><p>...</p></div>
//! <div class="member" data-kind="method">
//!   <pre class="signature">boolean add(E e)</pre>
//!   <div class="description"><p>...</p></div>
//!   <ul class="throws"><li>java.sql.SQLException</li></ul>
//! </div>
//! ```
//!
//! `data-kind` is `class`, `interface` or `exception` on the header and
//! `method`, `constructor` or `field` on members.

mod parse;
mod sentences;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use parse::{erase_type, parse_api_reference, parse_signature, Signature};
pub use sentences::{
    attach_sentence_attributes, identify_directive_sentences, identify_function_sentences,
    KeywordSet,
};

use crate::packet::ApiPacket;
use crate::textproc::TextProcessor;

#[derive(Debug, Error)]
pub enum ApiKgError {
    #[error("malformed document {page}: missing or invalid {marker}")]
    MalformedDocument { page: String, marker: String },
    #[error("entity id collision for {id}")]
    IdCollision { id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ApiKind {
    Package,
    Class,
    Interface,
    Exception,
    Method,
    Constructor,
    Field,
    Parameter,
}

impl ApiKind {
    pub fn is_type(self) -> bool {
        matches!(self, ApiKind::Class | ApiKind::Interface | ApiKind::Exception)
    }

    pub fn is_callable(self) -> bool {
        matches!(self, ApiKind::Method | ApiKind::Constructor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiEntity {
    pub id: String,
    pub kind: ApiKind,
    pub qualified_name: String,
    pub simple_name: String,
    pub param_count: Option<u32>,
    pub function_sentence: Option<String>,
    pub directive_sentences: Vec<String>,
    pub packet: ApiPacket,
}

/// Stable id: qualified name plus a short hash of it.
pub fn entity_id(qualified_name: &str) -> String {
    let digest = Sha256::digest(qualified_name.as_bytes());
    format!("{qualified_name}@{}", &hex::encode(digest)[..8])
}

impl ApiEntity {
    pub fn new(kind: ApiKind, qualified_name: String, simple_name: String, packet: ApiPacket) -> Self {
        let param_count = if kind.is_callable() { packet.param_count } else { None };
        ApiEntity {
            id: entity_id(&qualified_name),
            kind,
            qualified_name,
            simple_name,
            param_count,
            function_sentence: None,
            directive_sentences: Vec::new(),
            packet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeclKind {
    Contain,
    Extend,
    Implement,
    Throw,
    HasMethod,
    HasParameter,
    HasField,
    HasConstructor,
}

impl DeclKind {
    pub const ALL: [DeclKind; 8] = [
        DeclKind::Contain,
        DeclKind::Extend,
        DeclKind::Implement,
        DeclKind::Throw,
        DeclKind::HasMethod,
        DeclKind::HasParameter,
        DeclKind::HasField,
        DeclKind::HasConstructor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DeclKind::Contain => "contain",
            DeclKind::Extend => "extend",
            DeclKind::Implement => "implement",
            DeclKind::Throw => "throw",
            DeclKind::HasMethod => "hasMethod",
            DeclKind::HasParameter => "hasParameter",
            DeclKind::HasField => "hasField",
            DeclKind::HasConstructor => "hasConstructor",
        }
    }
}

impl fmt::Display for DeclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeclRelation {
    pub src: String,
    pub dst: String,
    pub kind: DeclKind,
}

/// Entities and relations of one parsed page.
#[derive(Debug, Clone, Default)]
pub struct ApiPage {
    pub entities: Vec<ApiEntity>,
    pub relations: Vec<DeclRelation>,
    /// Description sentences in page order, pronouns resolved.
    pub sentences: Vec<String>,
}

/// The merged API graph of a corpus.
#[derive(Debug, Clone, Default)]
pub struct ApiGraph {
    pub entities: BTreeMap<String, ApiEntity>,
    pub relations: BTreeSet<DeclRelation>,
    /// Description sentences of all pages, in page order.
    pub sentences: Vec<String>,
    /// Relations dropped because an endpoint is not part of the corpus.
    pub diagnostics: Vec<String>,
}

impl ApiGraph {
    /// Merge parsed pages. Identical entities from several pages (packages)
    /// collapse; differing payloads under one id are an error.
    pub fn assemble(pages: Vec<ApiPage>) -> Result<Self, ApiKgError> {
        let mut graph = ApiGraph::default();
        let mut relations = Vec::new();
        for page in pages {
            for e in page.entities {
                match graph.entities.get(&e.id) {
                    Some(prev) if *prev != e => return Err(ApiKgError::IdCollision { id: e.id }),
                    Some(_) => {}
                    None => {
                        graph.entities.insert(e.id.clone(), e);
                    }
                }
            }
            relations.extend(page.relations);
            graph.sentences.extend(page.sentences);
        }
        for r in relations {
            if graph.entities.contains_key(&r.src) && graph.entities.contains_key(&r.dst) {
                graph.relations.insert(r);
            } else {
                graph
                    .diagnostics
                    .push(format!("dangling\t{}\t{}\t{}", r.src, r.kind, r.dst));
            }
        }
        Ok(graph)
    }

    /// Parse every page (in parallel) and merge.
    pub fn build(
        pages: &[(String, String)],
        tp: &TextProcessor,
        keywords: &KeywordSet,
    ) -> Result<Self, ApiKgError> {
        use rayon::prelude::*;
        let parsed = pages
            .par_iter()
            .map(|(id, html)| parse_api_reference(id, html, tp, keywords))
            .collect::<Result<Vec<_>, _>>()?;
        Self::assemble(parsed)
    }
}

#[cfg(test)]
mod tests;
