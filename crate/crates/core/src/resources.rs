//! Shipped configuration resources (lexicon, patterns, keyword lists) and
//! loading of user-supplied replacements.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

pub const LEXICON: &str = include_str!("../data/lexicon.tsv");
pub const ORTHOGRAPHY: &str = include_str!("../data/orthography.tsv");
pub const STEMS: &str = include_str!("../data/stems.tsv");
pub const PATTERNS: &str = include_str!("../data/patterns.dsl");
pub const DIRECTIVE_KEYWORDS: &str = include_str!("../data/directive_keywords.txt");
pub const TASK_PHRASES: &str = include_str!("../data/task_phrases.tsv");
pub const LEXICAL_LISTS: &str = include_str!("../data/lexical.toml");

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Syntax {
        source_name: String,
        line: usize,
        message: String,
    },
}

impl ResourceError {
    pub fn syntax(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        ResourceError::Syntax {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}

pub fn read(path: &Path) -> Result<String, ResourceError> {
    std::fs::read_to_string(path).map_err(|source| ResourceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Non-comment, non-blank lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Word lists shared by several stages.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize, serde::Serialize)]
pub struct LexicalLists {
    pub conjunctions: Vec<String>,
    pub code_keywords: Vec<String>,
    pub note_keywords: Vec<String>,
    pub summary_keywords: Vec<String>,
    pub temporal_words: Vec<String>,
    pub query_lead_ins: Vec<String>,
    pub action_verbs: Vec<String>,
}

impl LexicalLists {
    pub fn shipped() -> Self {
        Self::parse(LEXICAL_LISTS, "lexical.toml").expect("shipped lexical lists are valid")
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ResourceError> {
        toml::from_str(text).map_err(|e| ResourceError::syntax(source_name, 0, e.to_string()))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, ResourceError> {
        match path {
            Some(p) => Self::parse(&read(p)?, &p.display().to_string()),
            None => Ok(Self::shipped()),
        }
    }
}
