use std::collections::HashMap;

use crate::resources::{self, ResourceError};

/// Explicit inflection → stem table used for keyword matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StemMap {
    forms: HashMap<String, String>,
}

impl StemMap {
    pub fn shipped() -> Self {
        Self::parse(resources::STEMS, "stems.tsv").expect("shipped stem map is valid")
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ResourceError> {
        let mut forms = HashMap::new();
        for (line_no, line) in resources::content_lines(text) {
            let (form, stem) = line.split_once('\t').ok_or_else(|| {
                ResourceError::syntax(source_name, line_no, "expected form<TAB>stem")
            })?;
            forms.insert(form.trim().to_lowercase(), stem.trim().to_lowercase());
        }
        Ok(StemMap { forms })
    }

    pub fn stem<'a>(&'a self, lower: &'a str) -> &'a str {
        self.forms.get(lower).map(String::as_str).unwrap_or(lower)
    }

    /// Does `word` match `keyword`? A keyword ending in `*` is a prefix;
    /// otherwise both sides are reduced through the stem table.
    pub fn keyword_matches(&self, keyword: &str, word: &str) -> bool {
        let word = word.to_lowercase();
        let keyword = keyword.to_lowercase();
        match keyword.strip_suffix('*') {
            Some(prefix) => word.starts_with(prefix),
            None => self.stem(&word) == self.stem(&keyword),
        }
    }
}
