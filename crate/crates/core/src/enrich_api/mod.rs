//! API semantic relations mined from tutorial sentences.
//!
//! Sentences mentioning at least two APIs are run through a list of
//! sentence patterns written in a small DSL, one per line:
//!
//! ```text
//! FunctionOpposite :: AE1 opposite (ADP) AE2
//! ```
//!
//! `AE1`/`AE2` are API mention slots, `VB VBN NP ADP ADV PRON` are
//! part-of-speech wildcards, `( )` marks an optional group and `[a/b c]`
//! an alternation of (possibly multi-word) keywords. Any other word is a
//! literal keyword, compared through the stem map; a trailing `*` makes it
//! a prefix. Up to [`MAX_GAP`] tokens may separate consecutive elements,
//! provided none of them is an API mention, a pronoun or a sentence end.

mod pattern;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pattern::{
    compile_pattern, compile_template, match_patterns, Element, PatternMatch, PatternSet, PatternSyntaxError, SentencePattern, Wildcard,
    MAX_GAP,
};

use crate::fusion::Linker;
use crate::graphstore::{Edge, ATTR_SEPARATOR, GraphError, KnowledgeGraph, Label};
use crate::taskkg::{mention_packet, DescriptionSentence, SnippetResolver, TypeTable};
use crate::textproc::{Mention, TextProcessor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationCategory {
    FunctionSimilarity,
    FunctionOpposite,
    BehaviorDifference,
    FunctionReplace,
    FunctionCollaboration,
    TypeConversion,
    ImplementConstraint,
    LogicConstraint,
    EfficiencyComparison,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown relation category {0:?}")]
pub struct UnknownCategory(pub String);

impl RelationCategory {
    pub const ALL: [RelationCategory; 9] = [
        RelationCategory::FunctionSimilarity,
        RelationCategory::FunctionOpposite,
        RelationCategory::BehaviorDifference,
        RelationCategory::FunctionReplace,
        RelationCategory::FunctionCollaboration,
        RelationCategory::TypeConversion,
        RelationCategory::ImplementConstraint,
        RelationCategory::LogicConstraint,
        RelationCategory::EfficiencyComparison,
    ];

    pub fn label(self) -> Label {
        match self {
            RelationCategory::FunctionSimilarity => Label::FunctionSimilarity,
            RelationCategory::FunctionOpposite => Label::FunctionOpposite,
            RelationCategory::BehaviorDifference => Label::BehaviorDifference,
            RelationCategory::FunctionReplace => Label::FunctionReplace,
            RelationCategory::FunctionCollaboration => Label::FunctionCollaboration,
            RelationCategory::TypeConversion => Label::TypeConversion,
            RelationCategory::ImplementConstraint => Label::ImplementConstraint,
            RelationCategory::LogicConstraint => Label::LogicConstraint,
            RelationCategory::EfficiencyComparison => Label::EfficiencyComparison,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.label().as_str()
    }
}

impl FromStr for RelationCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A relation between two API entities, in pattern slot order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiSemanticRelation {
    pub src: String,
    pub dst: String,
    pub category: RelationCategory,
    pub evidence: Vec<String>,
    pub pattern_ids: Vec<String>,
}

impl ApiSemanticRelation {
    pub fn edge(&self) -> Edge {
        let sep = ATTR_SEPARATOR.to_string();
        Edge::new(&self.src, &self.dst, self.category.label())
            .with_attr("evidence", self.evidence.join(&sep))
            .with_attr("pattern_id", self.pattern_ids.join(&sep))
    }
}

/// Sentences with at least two API mentions, paired with the mentions.
pub fn select_relation_sentences<'a>(tp: &TextProcessor, sentences: &'a [DescriptionSentence]) -> Vec<(&'a DescriptionSentence, Vec<Mention>)> {
    sentences
        .iter()
        .filter_map(|s| {
            let mentions = tp.detect_api_mentions(&s.sentence, Some(&s.code_spans));
            (mentions.len() >= 2).then_some((s, mentions))
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnrichApiReport {
    pub relations: Vec<ApiSemanticRelation>,
    /// Tab-separated rows: reason, pattern id, mention, mention, sentence.
    pub diagnostics: Vec<String>,
}

impl EnrichApiReport {
    pub fn apply(&self, graph: &mut KnowledgeGraph) -> Result<(), GraphError> {
        for r in &self.relations {
            graph.put_edge(r.edge())?;
        }
        Ok(())
    }
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Match every relation sentence, link both mentions of each match with
/// the sentence as context, and merge the results per (src, dst, category).
pub fn add_api_semantic_relations(
    tp: &TextProcessor,
    sentences: &[DescriptionSentence],
    patterns: &PatternSet,
    linker: &Linker<'_>,
    types: &TypeTable,
    code_keywords: &[String],
) -> EnrichApiReport {
    use rayon::prelude::*;
    type Found = (Vec<(String, String, RelationCategory, String, String)>, Vec<String>);
    let selected = select_relation_sentences(tp, sentences);
    let parts: Vec<Found> = selected
        .par_iter()
        .map(|(ds, mentions)| {
            let mut rels = Vec::new();
            let mut diags = Vec::new();
            let matches = match_patterns(&ds.sentence, mentions, patterns, tp.stems());
            if matches.is_empty() {
                return (rels, diags);
            }
            let resolver = ds.snippet.as_deref().map(|c| SnippetResolver::new(c, types));
            let sites = resolver.as_ref().map(|r| r.call_sites(code_keywords)).unwrap_or_default();
            let raw = &ds.sentence.raw;
            let link = |m: &Mention| {
                let packet = mention_packet(&m.text, resolver.as_ref(), &sites, types);
                linker.link_packet(&packet, raw).map(|l| l.id)
            };
            for pm in matches {
                let row = |reason: &str| {
                    format!("{reason}\t{}\t{}\t{}\t{}", pm.pattern_id, pm.mention1.text, pm.mention2.text, clean(raw))
                };
                match (link(&pm.mention1), link(&pm.mention2)) {
                    (Some(a), Some(b)) if a == b => diags.push(row("self")),
                    (Some(a), Some(b)) => rels.push((a, b, pm.category, clean(raw), pm.pattern_id.clone())),
                    _ => diags.push(row("unlinked")),
                }
            }
            (rels, diags)
        })
        .collect();

    let mut merged: BTreeMap<(String, String, RelationCategory), ApiSemanticRelation> = BTreeMap::new();
    let mut report = EnrichApiReport::default();
    for (rels, diags) in parts {
        report.diagnostics.extend(diags);
        for (src, dst, category, evidence, pattern_id) in rels {
            let r = merged
                .entry((src.clone(), dst.clone(), category))
                .or_insert_with(|| ApiSemanticRelation {
                    src,
                    dst,
                    category,
                    evidence: Vec::new(),
                    pattern_ids: Vec::new(),
                });
            if !r.evidence.contains(&evidence) {
                r.evidence.push(evidence);
            }
            if !r.pattern_ids.contains(&pattern_id) {
                r.pattern_ids.push(pattern_id);
            }
        }
    }
    report.relations = merged.into_values().collect();
    report
}

#[cfg(test)]
mod tests;
