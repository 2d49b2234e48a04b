use super::{PosTag, TextProcessor};

/// Short display name of an API: the last member segment, with any
/// parameter list emptied ("java.util.Queue.peek()" → "peek()").
pub fn display_name(api: &str) -> String {
    let (head, call) = match api.find('(') {
        Some(p) => (&api[..p], true),
        None => (api, false),
    };
    let last = head.rsplit('.').next().unwrap_or(head);
    if call {
        format!("{last}()")
    } else {
        last.to_string()
    }
}

const DEMONSTRATIVE_HEADS: &[&str] = &["method", "class", "interface", "constructor"];

impl TextProcessor {
    /// Replace sentence-initial "it", "this", "this method" and
    /// "this class" with the owning API's display name. "this" alone is
    /// only replaced when a verb or auxiliary follows it.
    pub fn resolve_pronouns(&self, section_text: &str, owner_api: &str) -> String {
        let name = display_name(owner_api);
        let mut out = String::with_capacity(section_text.len());
        let mut last = 0;
        for sentence in self.sentences(section_text) {
            let toks = &sentence.tokens;
            let Some(first) = toks.first() else { continue };
            let next = toks.get(1);
            let end = match first.lower().as_str() {
                "it" => Some(first.span.1),
                "this" => match next {
                    Some(t) if DEMONSTRATIVE_HEADS.contains(&t.lower().as_str()) => Some(t.span.1),
                    Some(t) if t.pos.is_verb() || t.pos == PosTag::OTHER && t.kind != super::TokenKind::Punct => {
                        Some(first.span.1)
                    }
                    _ => None,
                },
                _ => None,
            };
            if let Some(end) = end {
                out.push_str(&section_text[last..first.span.0]);
                out.push_str(&name);
                last = end;
            }
        }
        out.push_str(&section_text[last..]);
        out
    }
}
