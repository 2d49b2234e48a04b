use super::ApiEntity;
use crate::resources::{self, ResourceError};
use crate::textproc::{PosTag, Sentence, StemMap, TokenKind};

/// Directive keywords; a trailing `*` marks a stem prefix ("requir*").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSet {
    keywords: Vec<String>,
}

impl KeywordSet {
    pub fn shipped() -> Self {
        Self::parse(resources::DIRECTIVE_KEYWORDS, "directive_keywords.txt")
            .expect("shipped keywords are valid")
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ResourceError> {
        let keywords: Vec<String> = resources::content_lines(text)
            .map(|(_, l)| l.trim().to_lowercase())
            .collect();
        if keywords.is_empty() {
            return Err(ResourceError::syntax(source_name, 0, "empty keyword list"));
        }
        Ok(KeywordSet { keywords })
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        KeywordSet {
            keywords: words.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    /// Whether any word token of the sentence matches a keyword.
    pub fn matches(&self, sentence: &Sentence, stems: &StemMap) -> bool {
        sentence
            .tokens
            .iter()
            .filter(|t| matches!(t.kind, TokenKind::Word | TokenKind::CodeKeyword))
            .any(|t| {
                let w = t.lower();
                self.keywords.iter().any(|k| stems.keyword_matches(k, &w))
            })
    }
}

/// "java.util.List.add(E)" → "add"; "remove()" → "remove".
fn bare_name(text: &str) -> &str {
    let head = text.split('(').next().unwrap_or(text);
    head.rsplit('.').next().unwrap_or(head)
}

/// Sentences defining what the entity does: its simple name is the subject
/// (first noun before the first verb), or the sentence opens with a verb.
pub fn identify_function_sentences(entity: &ApiEntity, description: &[Sentence]) -> Vec<Sentence> {
    description
        .iter()
        .filter(|s| {
            let Some(first) = s.tokens.first() else { return false };
            if first.pos == PosTag::VB {
                return true;
            }
            let verb_at = s.tokens.iter().position(|t| t.pos == PosTag::VB).unwrap_or(s.tokens.len());
            s.tokens[..verb_at]
                .iter()
                .find(|t| t.pos == PosTag::NN)
                .is_some_and(|t| bare_name(&t.text) == entity.simple_name)
        })
        .cloned()
        .collect()
}

pub fn identify_directive_sentences(
    description: &[Sentence],
    keywords: &KeywordSet,
    stems: &StemMap,
) -> Vec<Sentence> {
    description
        .iter()
        .filter(|s| keywords.matches(s, stems))
        .cloned()
        .collect()
}

pub fn attach_sentence_attributes(mut entity: ApiEntity, fns: &[Sentence], dirs: &[Sentence]) -> ApiEntity {
    if !fns.is_empty() {
        let merged = fns.iter().map(|s| s.raw.as_str()).collect::<Vec<_>>().join(" ");
        entity.function_sentence = Some(match entity.function_sentence.take() {
            Some(prev) => format!("{prev} {merged}"),
            None => merged,
        });
    }
    entity.directive_sentences.extend(dirs.iter().map(|s| s.raw.clone()));
    entity
}
