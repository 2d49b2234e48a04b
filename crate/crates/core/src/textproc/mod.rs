//! Software-aware text processing.
//!
//! Everything downstream (API reference parsing, tutorial parsing, pattern
//! matching, query parsing) sees text through a [`TextProcessor`]: a
//! tokenizer that keeps API tokens such as `add(index, E)` or
//! `java.util.List` intact, a sentence splitter that glues conjunction-led
//! sentences onto their predecessor, a lexicon + suffix part-of-speech
//! tagger, verb-phrase chunking, sentence-initial pronoun resolution and API
//! mention detection.
//!
//! All operations are pure; a processor is cheap to share behind an `Arc`.

mod lexicon;
mod markup;
mod mentions;
mod orthography;
mod phrases;
mod pronouns;
mod stem;
mod tagger;
mod tokenizer;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use lexicon::Lexicon;
pub use markup::{strip_code_markup, MarkedText};
pub use mentions::Mention;
pub use orthography::{Orthography, Scope};
pub use pronouns::display_name;
pub use stem::StemMap;
pub(crate) use phrases::verb_phrases;

use crate::resources::{self, LexicalLists, ResourceError};

/// Byte range `[start, end)` into the text a token was produced from.
pub type Span = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    ApiToken,
    CodeKeyword,
    Punct,
    Number,
}

/// Coarse part-of-speech tags.
///
/// `NpPart` marks tokens that can sit inside a noun phrase without being
/// nouns themselves (numbers). `Other` covers auxiliaries, modals and
/// punctuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    VB,
    VBN,
    NN,
    NpPart,
    ADP,
    ADV,
    ADJ,
    DET,
    CONJ,
    PRON,
    OTHER,
}

impl PosTag {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "VB" => PosTag::VB,
            "VBN" => PosTag::VBN,
            "NN" => PosTag::NN,
            "NP-part" | "NpPart" => PosTag::NpPart,
            "ADP" => PosTag::ADP,
            "ADV" => PosTag::ADV,
            "ADJ" => PosTag::ADJ,
            "DET" => PosTag::DET,
            "CONJ" => PosTag::CONJ,
            "PRON" => PosTag::PRON,
            "OTHER" => PosTag::OTHER,
            _ => return None,
        })
    }

    pub fn is_verb(self) -> bool {
        matches!(self, PosTag::VB | PosTag::VBN)
    }

    /// Tags allowed inside a noun phrase run.
    pub fn is_nominal(self) -> bool {
        matches!(self, PosTag::DET | PosTag::ADJ | PosTag::NN | PosTag::NpPart)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    pub pos: PosTag,
    pub span: Span,
}

impl Token {
    pub fn lower(&self) -> String {
        self.text.to_lowercase()
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == TokenKind::Punct && matches!(self.text.as_str(), "." | "!" | "?")
    }
}

/// A sentence: its tokens (spans relative to the text it was split from)
/// and the raw slice of that text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub raw: String,
    pub source_id: String,
    /// Byte offset of `raw` in the original text.
    pub offset: usize,
}

impl Sentence {
    pub fn with_source(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbPhrase {
    pub tokens: Vec<Token>,
}

impl VerbPhrase {
    pub fn head_verb(&self) -> Option<&Token> {
        self.tokens.first()
    }

    /// Phrase text reconstructed from the source the tokens came from.
    pub fn text_in(&self, source: &str) -> String {
        match (self.tokens.first(), self.tokens.last()) {
            (Some(a), Some(b)) => source[a.span.0..b.span.1].to_string(),
            _ => String::new(),
        }
    }

    /// Phrase text with tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// Configured text processor. The default instance uses the shipped
/// lexicon, orthography patterns, stem map and word lists.
#[derive(Debug, Clone)]
pub struct TextProcessor {
    lexicon: Lexicon,
    orthography: Orthography,
    stems: StemMap,
    conjunctions: Vec<String>,
    code_keywords: Vec<String>,
}

impl Default for TextProcessor {
    fn default() -> Self {
        let lists = LexicalLists::shipped();
        TextProcessor {
            lexicon: Lexicon::shipped(),
            orthography: Orthography::shipped(),
            stems: StemMap::shipped(),
            conjunctions: lists.conjunctions,
            code_keywords: lists.code_keywords,
        }
    }
}

impl TextProcessor {
    pub fn new(
        lexicon: Lexicon,
        orthography: Orthography,
        stems: StemMap,
        lists: &LexicalLists,
    ) -> Self {
        TextProcessor {
            lexicon,
            orthography,
            stems,
            conjunctions: lists.conjunctions.clone(),
            code_keywords: lists.code_keywords.clone(),
        }
    }

    /// Load from explicit resource files; `None` keeps the shipped default.
    pub fn from_files(
        lexicon: Option<&Path>,
        orthography: Option<&Path>,
        stems: Option<&Path>,
        lists: &LexicalLists,
    ) -> Result<Self, ResourceError> {
        let lexicon = match lexicon {
            Some(p) => Lexicon::parse(&resources::read(p)?, &p.display().to_string())?,
            None => Lexicon::shipped(),
        };
        let orthography = match orthography {
            Some(p) => Orthography::parse(&resources::read(p)?, &p.display().to_string())?,
            None => Orthography::shipped(),
        };
        let stems = match stems {
            Some(p) => StemMap::parse(&resources::read(p)?, &p.display().to_string())?,
            None => StemMap::shipped(),
        };
        Ok(Self::new(lexicon, orthography, stems, lists))
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn orthography(&self) -> &Orthography {
        &self.orthography
    }

    pub fn stems(&self) -> &StemMap {
        &self.stems
    }

    pub fn conjunctions(&self) -> &[String] {
        &self.conjunctions
    }

    pub fn is_code_keyword(&self, word: &str) -> bool {
        self.code_keywords.iter().any(|k| k == word)
    }

    /// Split into sentences and tag them in one step.
    pub fn sentences(&self, text: &str) -> Vec<Sentence> {
        self.split_sentences(text)
            .into_iter()
            .map(|mut s| {
                s.tokens = self.pos_tag(s.tokens);
                s
            })
            .collect()
    }

    /// Tokenize and tag a short fragment (heading, phrase, object) as if it
    /// were running text, so capitalized words are eligible API mentions.
    pub fn tagged_fragment(&self, text: &str) -> Vec<Token> {
        self.pos_tag(self.tokenize_fragment(text))
    }

    /// Lower-cased, punctuation-free tokens; the unit the embedding model
    /// works on.
    pub fn embedding_tokens(&self, text: &str) -> Vec<String> {
        self.tokenize(text)
            .into_iter()
            .filter(|t| t.kind != TokenKind::Punct)
            .map(|t| t.text.to_lowercase())
            .collect()
    }
}

#[cfg(test)]
mod tests;
