use std::collections::HashMap;

use super::PosTag;
use crate::resources::{self, ResourceError};

/// Word → tag table. When a word is listed more than once the first entry
/// wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    version: String,
    entries: HashMap<String, PosTag>,
}

impl Lexicon {
    pub fn shipped() -> Self {
        Self::parse(resources::LEXICON, "lexicon.tsv").expect("shipped lexicon is valid")
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ResourceError> {
        let mut version = String::from("unversioned");
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if let Some(v) = line.strip_prefix("#version\t") {
                version = v.trim().to_string();
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| {
                ResourceError::syntax(source_name, i + 1, "expected word<TAB>POS")
            })?;
            let tag = PosTag::parse(tag.trim()).ok_or_else(|| {
                ResourceError::syntax(source_name, i + 1, format!("unknown tag {tag:?}"))
            })?;
            entries.entry(word.trim().to_lowercase()).or_insert(tag);
        }
        Ok(Lexicon { version, entries })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn get(&self, lower: &str) -> Option<PosTag> {
        self.entries.get(lower).copied()
    }

    pub fn is_verb(&self, lower: &str) -> bool {
        self.get(lower) == Some(PosTag::VB)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
