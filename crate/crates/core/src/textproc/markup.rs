use scraper::{ElementRef, Html, Node};

use super::Span;

/// Plain text extracted from HTML with whitespace collapsed, and the
/// byte spans covered by inline code elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkedText {
    pub text: String,
    pub code_spans: Vec<Span>,
}

impl MarkedText {
    pub fn from_element(el: ElementRef<'_>) -> Self {
        let mut out = MarkedText::default();
        let mut last_space = true;
        walk(el, &mut out, &mut last_space);
        let trimmed = out.text.trim_end().len();
        out.text.truncate(trimmed);
        for span in out.code_spans.iter_mut() {
            span.1 = span.1.min(trimmed);
            while span.1 > span.0 && out.text.as_bytes()[span.1 - 1] == b' ' {
                span.1 -= 1;
            }
        }
        out.code_spans.retain(|s| s.1 > s.0);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }
}

fn push_text(s: &str, out: &mut MarkedText, last_space: &mut bool) {
    for c in s.chars() {
        if c.is_whitespace() {
            if !*last_space {
                out.text.push(' ');
                *last_space = true;
            }
        } else {
            out.text.push(c);
            *last_space = false;
        }
    }
}

fn walk(el: ElementRef<'_>, out: &mut MarkedText, last_space: &mut bool) {
    for child in el.children() {
        match child.value() {
            Node::Text(t) => push_text(t, out, last_space),
            Node::Element(e) => {
                let Some(child_el) = ElementRef::wrap(child) else { continue };
                match e.name() {
                    "code" | "tt" => {
                        let start = out.text.len();
                        walk(child_el, out, last_space);
                        out.code_spans.push((start, out.text.len()));
                    }
                    "br" => push_text(" ", out, last_space),
                    _ => walk(child_el, out, last_space),
                }
            }
            _ => {}
        }
    }
}

/// Strip an HTML fragment to text, recording `<code>` spans.
pub fn strip_code_markup(html: &str) -> MarkedText {
    let doc = Html::parse_fragment(html);
    MarkedText::from_element(doc.root_element())
}
