use scraper::{ElementRef, Html, Node};

use crate::textproc::MarkedText;

/// A list item; nested lists become children.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ListItem {
    pub text: MarkedText,
    pub children: Vec<ListItem>,
}

/// Heading-delimited section of a tutorial. The document itself is the
/// level-0 root section.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TutorialSection {
    pub level: u8,
    pub heading: MarkedText,
    pub paragraphs: Vec<MarkedText>,
    pub code: Vec<String>,
    pub lists: Vec<Vec<ListItem>>,
    pub children: Vec<TutorialSection>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TutorialDocument {
    pub id: String,
    pub root: TutorialSection,
}

fn heading_level(name: &str) -> Option<u8> {
    match name {
        "h1" => Some(1),
        "h2" => Some(2),
        "h3" => Some(3),
        "h4" => Some(4),
        "h5" => Some(5),
        "h6" => Some(6),
        _ => None,
    }
}

/// Text of an `li` excluding nested lists.
fn item_text(li: ElementRef<'_>) -> MarkedText {
    let html: String = li
        .children()
        .filter_map(|c| match c.value() {
            Node::Element(e) if matches!(e.name(), "ul" | "ol") => None,
            Node::Element(_) => ElementRef::wrap(c).map(|e| e.html()),
            Node::Text(t) => Some(escape(t)),
            _ => None,
        })
        .collect();
    crate::textproc::strip_code_markup(&html)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn parse_list(list: ElementRef<'_>) -> Vec<ListItem> {
    list.children()
        .filter_map(ElementRef::wrap)
        .filter(|e| e.value().name() == "li")
        .map(|li| ListItem {
            text: item_text(li),
            children: li
                .children()
                .filter_map(ElementRef::wrap)
                .filter(|e| matches!(e.value().name(), "ul" | "ol"))
                .flat_map(parse_list)
                .collect(),
        })
        .collect()
}

struct Builder<'a> {
    code_tag: &'a str,
    /// Open sections, root first.
    stack: Vec<TutorialSection>,
}

impl Builder<'_> {
    fn current(&mut self) -> &mut TutorialSection {
        self.stack.last_mut().expect("root section")
    }

    fn close_until(&mut self, level: u8) {
        while self.stack.len() > 1 && self.stack.last().is_some_and(|s| s.level >= level) {
            let done = self.stack.pop().expect("non-root");
            self.current().children.push(done);
        }
    }

    fn visit(&mut self, el: ElementRef<'_>) {
        let name = el.value().name();
        if let Some(level) = heading_level(name) {
            self.close_until(level);
            self.stack.push(TutorialSection {
                level,
                heading: MarkedText::from_element(el),
                ..Default::default()
            });
        } else if name == self.code_tag {
            let code: String = el.text().collect();
            let code = code.trim_matches('\n').to_string();
            if !code.trim().is_empty() {
                self.current().code.push(code);
            }
        } else if name == "p" {
            let text = MarkedText::from_element(el);
            if !text.is_empty() {
                self.current().paragraphs.push(text);
            }
        } else if matches!(name, "ul" | "ol") {
            let items = parse_list(el);
            if !items.is_empty() {
                self.current().lists.push(items);
            }
        } else if !matches!(name, "script" | "style" | "head" | "title") {
            for child in el.children().filter_map(ElementRef::wrap) {
                self.visit(child);
            }
        }
    }
}

/// Parse a tutorial page into its section tree. `code_tag` names the
/// element holding code snippets.
pub fn parse_tutorial(id: &str, html: &str, code_tag: &str) -> TutorialDocument {
    let doc = Html::parse_document(html);
    let mut b = Builder {
        code_tag,
        stack: vec![TutorialSection::default()],
    };
    b.visit(doc.root_element());
    b.close_until(1);
    TutorialDocument {
        id: id.to_string(),
        root: b.stack.pop().expect("root section"),
    }
}
