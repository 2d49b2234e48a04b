//! Linking API mentions to API entities, and the task→API fusion links.
//!
//! A mention becomes an [`ApiReferenceTuple`] (its packet plus the sentence
//! it appeared in). Candidates are the entities whose packet the mention's
//! packet matches; several candidates are ranked by the similarity of the
//! sentence with each candidate's function sentence.

mod embedding;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use embedding::{cosine, sentence_similarity, train_embeddings, EmbeddingConfig, EmbeddingError, EmbeddingModel};

use crate::apikg::{ApiEntity, ApiKind};
use crate::graphstore::{Edge, GraphError, KnowledgeGraph, Label};
use crate::packet::{match_api_packet, ApiPacket};
use crate::textproc::TextProcessor;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiReferenceTuple {
    pub packet: ApiPacket,
    pub sentence: String,
}

impl ApiReferenceTuple {
    pub fn new(packet: ApiPacket, sentence: impl Into<String>) -> Self {
        ApiReferenceTuple {
            packet,
            sentence: sentence.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FusionLink {
    pub task: String,
    pub api: String,
    pub via_packet: ApiPacket,
    pub disambiguated: bool,
}

impl FusionLink {
    pub fn edge(&self) -> Edge {
        Edge::new(&self.task, &self.api, Label::FusionLink)
            .with_attr("via_packet", self.via_packet.to_string())
            .with_attr("disambiguated", self.disambiguated.to_string())
    }
}

/// Outcome of linking one tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linked {
    pub id: String,
    /// More than one candidate matched and the sentence decided.
    pub disambiguated: bool,
}

#[derive(Debug, Clone)]
struct Candidate {
    id: String,
    qualified_name: String,
    packet: ApiPacket,
    function_sentence: Option<String>,
}

/// Linkable API entities grouped by packet name. Packages and parameters
/// are not link targets.
#[derive(Debug, Clone, Default)]
pub struct ApiPacketIndex {
    by_name: BTreeMap<String, Vec<Candidate>>,
}

impl ApiPacketIndex {
    pub fn new<'a>(entities: impl IntoIterator<Item = &'a ApiEntity>) -> Self {
        let mut by_name: BTreeMap<String, Vec<Candidate>> = BTreeMap::new();
        for e in entities {
            if matches!(e.kind, ApiKind::Package | ApiKind::Parameter) {
                continue;
            }
            let Some(name) = &e.packet.name else { continue };
            by_name.entry(name.clone()).or_default().push(Candidate {
                id: e.id.clone(),
                qualified_name: e.qualified_name.clone(),
                packet: e.packet.clone(),
                function_sentence: e.function_sentence.clone(),
            });
        }
        for list in by_name.values_mut() {
            list.sort_by(|a, b| a.qualified_name.cmp(&b.qualified_name).then(a.id.cmp(&b.id)));
        }
        ApiPacketIndex { by_name }
    }

    pub fn from_graph(graph: &KnowledgeGraph) -> Self {
        Self::new(graph.api_entities())
    }

    /// Ids of the entities whose packet `q` matches, by qualified name.
    pub fn candidates(&self, q: &ApiPacket) -> Vec<&str> {
        self.matching(q).map(|c| c.id.as_str()).collect()
    }

    fn matching<'a, 'q>(&'a self, q: &'q ApiPacket) -> impl Iterator<Item = &'a Candidate> + use<'a, 'q> {
        q.name
            .as_ref()
            .and_then(|n| self.by_name.get(n))
            .into_iter()
            .flatten()
            .filter(move |c| match_api_packet(q, &c.packet))
    }

    pub fn len(&self) -> usize {
        self.by_name.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }
}

pub fn link_api_mention(tp: &TextProcessor, t: &ApiReferenceTuple, index: &ApiPacketIndex, m: &EmbeddingModel) -> Option<Linked> {
    let candidates: Vec<&Candidate> = index.matching(&t.packet).collect();
    match candidates.as_slice() {
        [] => None,
        [only] => Some(Linked {
            id: only.id.clone(),
            disambiguated: false,
        }),
        many => {
            // Candidates come sorted by qualified name, so keeping the first
            // maximum breaks ties towards the smallest name.
            let mut best: Option<(&Candidate, f64)> = None;
            for c in many {
                let score = c
                    .function_sentence
                    .as_deref()
                    .map_or(0.0, |fs| sentence_similarity(tp, &t.sentence, fs, m));
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((c, score));
                }
            }
            best.map(|(c, _)| Linked {
                id: c.id.clone(),
                disambiguated: true,
            })
        }
    }
}

/// Mention linking with a fixed processor, index and model.
pub struct Linker<'a> {
    pub tp: &'a TextProcessor,
    pub index: &'a ApiPacketIndex,
    pub model: &'a EmbeddingModel,
}

impl Linker<'_> {
    pub fn link(&self, t: &ApiReferenceTuple) -> Option<Linked> {
        link_api_mention(self.tp, t, self.index, self.model)
    }

    pub fn link_packet(&self, packet: &ApiPacket, sentence: &str) -> Option<Linked> {
        self.link(&ApiReferenceTuple::new(packet.clone(), sentence))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FusionReport {
    pub links: Vec<FusionLink>,
    /// Tab-separated rows: `unlinked`, task id, packet, sentence.
    pub diagnostics: Vec<String>,
}

impl FusionReport {
    pub fn apply(&self, graph: &mut KnowledgeGraph) -> Result<(), GraphError> {
        for link in &self.links {
            graph.put_edge(link.edge())?;
        }
        Ok(())
    }
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Link every packet of every task in `graph` against its API entities.
pub fn fuse(graph: &KnowledgeGraph, linker: &Linker<'_>) -> FusionReport {
    use rayon::prelude::*;
    let tasks: Vec<_> = graph.tasks().collect();
    let parts: Vec<(Vec<FusionLink>, Vec<String>)> = tasks
        .par_iter()
        .map(|task| {
            let mut links = Vec::new();
            let mut diags = Vec::new();
            for tp in &task.api_packets {
                match linker.link_packet(&tp.packet, &tp.sentence) {
                    Some(l) => links.push(FusionLink {
                        task: task.id.clone(),
                        api: l.id,
                        via_packet: tp.packet.clone(),
                        disambiguated: l.disambiguated,
                    }),
                    None => diags.push(format!("unlinked\t{}\t{}\t{}", task.id, tp.packet, clean(&tp.sentence))),
                }
            }
            (links, diags)
        })
        .collect();
    let mut report = FusionReport::default();
    for (links, diags) in parts {
        report.links.extend(links);
        report.diagnostics.extend(diags);
    }
    report.links.sort();
    report.links.dedup();
    report
}
