use regex::Regex;

use crate::resources::{self, ResourceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Applies anywhere in a sentence.
    Any,
    /// Applies only to tokens that do not start a sentence.
    Mid,
    /// A match vetoes all other patterns.
    Exclude,
}

#[derive(Debug, Clone)]
struct NamedPattern {
    name: String,
    scope: Scope,
    regex: Regex,
}

/// The API-mention orthography: named regular expressions deciding whether
/// an identifier-like token is an API token.
#[derive(Debug, Clone)]
pub struct Orthography {
    patterns: Vec<NamedPattern>,
}

impl Orthography {
    pub fn shipped() -> Self {
        Self::parse(resources::ORTHOGRAPHY, "orthography.tsv")
            .expect("shipped orthography is valid")
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ResourceError> {
        let mut patterns = Vec::new();
        for (line_no, line) in resources::content_lines(text) {
            let mut parts = line.splitn(3, '\t');
            let (Some(name), Some(scope), Some(re)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(ResourceError::syntax(
                    source_name,
                    line_no,
                    "expected name<TAB>scope<TAB>regex",
                ));
            };
            let scope = match scope {
                "any" => Scope::Any,
                "mid" => Scope::Mid,
                "exclude" => Scope::Exclude,
                other => {
                    return Err(ResourceError::syntax(
                        source_name,
                        line_no,
                        format!("unknown scope {other:?}"),
                    ))
                }
            };
            let regex = Regex::new(re)
                .map_err(|e| ResourceError::syntax(source_name, line_no, e.to_string()))?;
            patterns.push(NamedPattern {
                name: name.to_string(),
                scope,
                regex,
            });
        }
        Ok(Orthography { patterns })
    }

    /// Name of the first pattern accepting `text`, honoring scopes.
    pub fn classify(&self, text: &str, sentence_start: bool) -> Option<&str> {
        if self
            .patterns
            .iter()
            .any(|p| p.scope == Scope::Exclude && p.regex.is_match(text))
        {
            return None;
        }
        self.patterns
            .iter()
            .filter(|p| match p.scope {
                Scope::Any => true,
                Scope::Mid => !sentence_start,
                Scope::Exclude => false,
            })
            .find(|p| p.regex.is_match(text))
            .map(|p| p.name.as_str())
    }

    pub fn is_api(&self, text: &str, sentence_start: bool) -> bool {
        self.classify(text, sentence_start).is_some()
    }
}
