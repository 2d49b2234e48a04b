use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::code::{SnippetResolver, TypeTable};
use super::packets::mention_packet;
use super::{
    ListItem, TaskApiPacket, TaskClassifier, TaskDeclKind, TaskDeclRelation, TaskEntity, TaskKgError,
    TutorialDocument, TutorialSection,
};
use crate::packet::ApiPacket;
use crate::resources::LexicalLists;
use crate::textproc::{verb_phrases, MarkedText, PosTag, Sentence, Span, TextProcessor, Token, VerbPhrase};

/// Keyword lists for task attributes and temporal relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskLexicon {
    pub note_keywords: Vec<String>,
    pub summary_keywords: Vec<String>,
    pub temporal_words: Vec<String>,
    pub code_keywords: Vec<String>,
}

impl TaskLexicon {
    pub fn from_lists(lists: &LexicalLists) -> Self {
        TaskLexicon {
            note_keywords: lists.note_keywords.clone(),
            summary_keywords: lists.summary_keywords.clone(),
            temporal_words: lists.temporal_words.clone(),
            code_keywords: lists.code_keywords.clone(),
        }
    }
}

impl Default for TaskLexicon {
    fn default() -> Self {
        Self::from_lists(&LexicalLists::shipped())
    }
}

/// A tutorial sentence with its inline code spans and the snippet of the
/// section it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptionSentence {
    pub doc: String,
    pub sentence: Sentence,
    pub code_spans: Vec<Span>,
    pub snippet: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaskAttributes {
    pub notes: Option<String>,
    pub code_snippet: Option<String>,
    pub code_summary: Option<String>,
    pub api_packets: Vec<TaskApiPacket>,
}

/// Split a verb phrase into action and object. `VB NP ADP NP` takes
/// precedence over `VB NP`; tokens after the pattern are ignored.
/// Returns the action, the object and the number of tokens consumed.
fn chunk(tokens: &[Token]) -> Result<(String, String, usize), TaskKgError> {
    let join = |ts: &[Token]| ts.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
    let phrase = || TaskKgError::NoPatternMatch { phrase: join(tokens) };
    let head = tokens.first().ok_or(TaskKgError::EmptyPhrase)?;
    if head.pos != PosTag::VB {
        return Err(phrase());
    }
    let np_end = |from: usize| {
        let mut j = from;
        while j < tokens.len() && tokens[j].pos.is_nominal() {
            j += 1;
        }
        j
    };
    let np1 = np_end(1);
    if np1 < tokens.len() && tokens[np1].pos == PosTag::ADP {
        let np2 = np_end(np1 + 1);
        if np2 > np1 + 1 {
            return Ok((join(&tokens[..np1]).to_lowercase(), join(&tokens[np1 + 1..np2]), np2));
        }
    }
    if np1 > 1 {
        return Ok((head.text.to_lowercase(), join(&tokens[1..np1]), np1));
    }
    Err(phrase())
}

pub fn chunk_action_object(phrase: &VerbPhrase) -> Result<(String, String), TaskKgError> {
    chunk(&phrase.tokens).map(|(a, o, _)| (a, o))
}

/// One packet per API mention of the sentence, in mention order.
pub fn extract_api_packets(
    tp: &TextProcessor,
    sentence: &Sentence,
    code_spans: &[Span],
    code_snippet: Option<&str>,
    types: &TypeTable,
    code_keywords: &[String],
) -> Vec<ApiPacket> {
    let resolver = code_snippet.map(|c| SnippetResolver::new(c, types));
    let sites = resolver
        .as_ref()
        .map(|r| r.call_sites(code_keywords))
        .unwrap_or_default();
    tp.detect_api_mentions(sentence, Some(code_spans))
        .iter()
        .map(|m| mention_packet(&m.text, resolver.as_ref(), &sites, types))
        .collect()
}

fn contains_keyword(sentence: &Sentence, keyword: &str) -> bool {
    let kw = keyword.to_lowercase();
    if kw.contains(' ') {
        let raw = format!(" {} ", sentence.raw.to_lowercase());
        let words: String = raw
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        return format!(" {words} ").contains(&format!(" {kw} "));
    }
    sentence.tokens.iter().any(|t| t.lower() == kw)
}

fn merge(sentences: Vec<&Sentence>) -> Option<String> {
    (!sentences.is_empty()).then(|| sentences.iter().map(|s| s.raw.as_str()).collect::<Vec<_>>().join(" "))
}

fn slug(phrase: &str) -> String {
    phrase
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

/// Sentences of a marked text, each paired with the code spans.
fn marked_sentences(tp: &TextProcessor, text: &MarkedText) -> Vec<(Sentence, Vec<Span>)> {
    tp.sentences(&text.text)
        .into_iter()
        .map(|s| (s, text.code_spans.clone()))
        .collect()
}

/// Everything needed to turn tutorials into tasks.
pub struct TaskExtractor<'a> {
    pub tp: &'a TextProcessor,
    pub classifier: &'a dyn TaskClassifier,
    pub threshold: f64,
    pub types: &'a TypeTable,
    pub lexicon: &'a TaskLexicon,
}

struct DocState {
    doc: String,
    tasks: Vec<TaskEntity>,
    relations: Vec<TaskDeclRelation>,
    sentences: Vec<DescriptionSentence>,
    slugs: HashMap<String, usize>,
}

/// A structural child that became a task, with the text deciding temporal
/// links to its predecessor.
struct ChildTask {
    id: String,
    lead: Option<Sentence>,
}

impl<'a> TaskExtractor<'a> {
    /// The first verb phrase in `tokens` that chunks and passes the
    /// classifier: (action, object, phrase).
    pub fn task_phrase(&self, tokens: &[Token]) -> Option<(String, String, String)> {
        for vp in verb_phrases(tokens) {
            let Ok((action, object, used)) = chunk(&vp.tokens) else { continue };
            let sub = VerbPhrase {
                tokens: vp.tokens[..used].to_vec(),
            };
            match self.classifier.score(&sub) {
                Ok(s) if s >= self.threshold => return Some((action, object, sub.text())),
                _ => {}
            }
        }
        None
    }

    /// Notes, code, summary and packets of a block of sentences.
    pub fn attributes(&self, sentences: &[(Sentence, Vec<Span>)], code: &[String]) -> TaskAttributes {
        let snippet = (!code.is_empty()).then(|| code.join("\n"));
        let has_any = |s: &Sentence, kws: &[String]| kws.iter().any(|k| contains_keyword(s, k));
        let notes = merge(
            sentences
                .iter()
                .map(|(s, _)| s)
                .filter(|s| has_any(s, &self.lexicon.note_keywords))
                .collect(),
        );
        let code_summary = merge(
            sentences
                .iter()
                .map(|(s, _)| s)
                .filter(|s| has_any(s, &self.lexicon.summary_keywords))
                .collect(),
        );
        let mut api_packets = Vec::new();
        for (s, spans) in sentences {
            let packets = extract_api_packets(
                self.tp,
                s,
                spans,
                snippet.as_deref(),
                self.types,
                &self.lexicon.code_keywords,
            );
            api_packets.extend(packets.into_iter().map(|packet| TaskApiPacket {
                packet,
                sentence: s.raw.clone(),
            }));
        }
        TaskAttributes {
            notes,
            code_snippet: snippet,
            code_summary,
            api_packets,
        }
    }

    fn has_temporal_word(&self, s: &Sentence) -> bool {
        self.lexicon.temporal_words.iter().any(|w| contains_keyword(s, w))
    }

    fn new_task(
        &self,
        st: &mut DocState,
        (action, object, phrase): (String, String, String),
        attrs: TaskAttributes,
        source: String,
    ) -> String {
        let base = format!("task:{}:{}", st.doc, slug(&phrase));
        let n = st.slugs.entry(base.clone()).or_insert(0);
        *n += 1;
        let id = if *n == 1 { base } else { format!("{base}~{n}") };
        st.tasks.push(TaskEntity {
            id: id.clone(),
            action,
            object,
            phrase,
            notes: attrs.notes,
            code_snippet: attrs.code_snippet,
            code_summary: attrs.code_summary,
            api_packets: attrs.api_packets,
            source,
        });
        id
    }

    fn link_children(&self, st: &mut DocState, parent: Option<&str>, children: &[ChildTask]) {
        for (i, c) in children.iter().enumerate() {
            if let Some(p) = parent {
                st.relations.push(TaskDeclRelation::new(p, &c.id, TaskDeclKind::ParentChild));
            }
            for other in &children[i + 1..] {
                st.relations.push(TaskDeclRelation::new(&c.id, &other.id, TaskDeclKind::Sibling));
            }
        }
        for pair in children.windows(2) {
            if pair[1].lead.as_ref().is_some_and(|s| self.has_temporal_word(s)) {
                st.relations.push(TaskDeclRelation::new(&pair[0].id, &pair[1].id, TaskDeclKind::Temporal));
            }
        }
    }

    /// Process a list; non-task items contribute their sentences to
    /// `loose`. Returns the task items.
    fn visit_items(
        &self,
        st: &mut DocState,
        items: &[ListItem],
        parent: Option<&str>,
        code: &[String],
        source: &str,
        loose: &mut Vec<(Sentence, Vec<Span>)>,
    ) -> Vec<ChildTask> {
        let snippet = (!code.is_empty()).then(|| code.join("\n"));
        let mut tasks = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let sentences = marked_sentences(self.tp, &item.text);
            for (s, spans) in &sentences {
                st.sentences.push(DescriptionSentence {
                    doc: st.doc.clone(),
                    sentence: s.clone(),
                    code_spans: spans.clone(),
                    snippet: snippet.clone(),
                });
            }
            let item_source = format!("{source}/li{}", i + 1);
            let found = sentences.iter().find_map(|(s, _)| self.task_phrase(&s.tokens));
            let own_parent = match found {
                Some(tp) => {
                    let attrs = self.attributes(&sentences, &[]);
                    let attrs = TaskAttributes {
                        api_packets: self.attributes(&sentences, code).api_packets,
                        ..attrs
                    };
                    let id = self.new_task(st, tp, attrs, item_source.clone());
                    tasks.push(ChildTask {
                        id: id.clone(),
                        lead: sentences.first().map(|(s, _)| s.clone()),
                    });
                    Some(id)
                }
                None => {
                    loose.extend(sentences);
                    parent.map(str::to_string)
                }
            };
            let mut nested_loose = Vec::new();
            let nested = self.visit_items(st, &item.children, own_parent.as_deref(), code, &item_source, &mut nested_loose);
            self.link_children(st, own_parent.as_deref(), &nested);
            loose.extend(nested_loose);
        }
        tasks
    }

    /// Returns this section's task (if its heading is one) with its lead
    /// sentence.
    fn visit_section(&self, st: &mut DocState, section: &TutorialSection, path: &str, ancestor: Option<&str>) -> Option<ChildTask> {
        let snippet = (!section.code.is_empty()).then(|| section.code.join("\n"));
        let heading = marked_sentences(self.tp, &section.heading);
        let mut own: Vec<(Sentence, Vec<Span>)> = Vec::new();
        for p in &section.paragraphs {
            own.extend(marked_sentences(self.tp, p));
        }
        for (s, spans) in heading.iter().chain(own.iter()) {
            st.sentences.push(DescriptionSentence {
                doc: st.doc.clone(),
                sentence: s.clone(),
                code_spans: spans.clone(),
                snippet: snippet.clone(),
            });
        }
        let lead = own.first().map(|(s, _)| s.clone());
        let phrase = heading.iter().find_map(|(s, _)| self.task_phrase(&s.tokens));

        // Reserve the section task before list items so ids follow document order.
        let section_id = phrase.map(|p| self.new_task(st, p, TaskAttributes::default(), format!("{}#{path}", st.doc)));
        let parent = section_id.clone().or(ancestor.map(str::to_string));

        let mut loose = Vec::new();
        for (i, list) in section.lists.iter().enumerate() {
            let items = self.visit_items(st, list, parent.as_deref(), &section.code, &format!("{}#{path}/ul{}", st.doc, i + 1), &mut loose);
            self.link_children(st, parent.as_deref(), &items);
        }

        if let Some(id) = &section_id {
            let mut sentences = heading.clone();
            sentences.extend(own.iter().cloned());
            sentences.extend(loose);
            let attrs = self.attributes(&sentences, &section.code);
            let task = st.tasks.iter_mut().find(|t| &t.id == id).expect("reserved task");
            task.notes = attrs.notes;
            task.code_snippet = attrs.code_snippet;
            task.code_summary = attrs.code_summary;
            task.api_packets = attrs.api_packets;
        }

        let mut children = Vec::new();
        for (i, child) in section.children.iter().enumerate() {
            let child_path = if path.is_empty() { format!("{}", i + 1) } else { format!("{path}.{}", i + 1) };
            if let Some(c) = self.visit_section(st, child, &child_path, parent.as_deref()) {
                children.push(c);
            }
        }
        self.link_children(st, parent.as_deref(), &children);
        section_id.map(|id| ChildTask { id, lead })
    }

    pub fn extract_document(&self, doc: &TutorialDocument) -> (Vec<TaskEntity>, Vec<TaskDeclRelation>, Vec<DescriptionSentence>) {
        let mut st = DocState {
            doc: doc.id.clone(),
            tasks: Vec::new(),
            relations: Vec::new(),
            sentences: Vec::new(),
            slugs: HashMap::new(),
        };
        self.visit_section(&mut st, &doc.root, "", None);
        st.relations.sort();
        st.relations.dedup();
        (st.tasks, st.relations, st.sentences)
    }
}

/// Attributes of a section's own text (paragraphs and code boxes).
pub fn extract_task_attributes(extractor: &TaskExtractor<'_>, section: &TutorialSection) -> TaskAttributes {
    let sentences: Vec<_> = section
        .paragraphs
        .iter()
        .flat_map(|p| marked_sentences(extractor.tp, p))
        .collect();
    extractor.attributes(&sentences, &section.code)
}

pub fn extract_task_relations(extractor: &TaskExtractor<'_>, doc: &TutorialDocument) -> Vec<TaskDeclRelation> {
    extractor.extract_document(doc).1
}
