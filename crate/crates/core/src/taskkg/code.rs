//! Lightweight call-site resolver for code snippets: a `Type var` table
//! from declarations, receivers resolved through it, one hop only.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use regex::Regex;

use crate::apikg::{ApiEntity, ApiGraph};
use crate::packet::ApiPacket;

/// Java control words that look like calls ("if (x)").
const CONTROL_WORDS: &[&str] = &[
    "if", "while", "for", "switch", "catch", "synchronized", "return", "new", "super", "this",
    "try", "else", "do", "throw", "assert",
];

/// Simple type name → qualified name, for names that are unambiguous.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeTable {
    simple: BTreeMap<String, Option<String>>,
    qualified: BTreeMap<String, ()>,
}

impl TypeTable {
    pub fn from_qualified_names<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Self {
        let mut table = TypeTable::default();
        for qn in names {
            table.qualified.insert(qn.to_string(), ());
            let simple = qn.rsplit('.').next().unwrap_or(qn).to_string();
            table
                .simple
                .entry(simple)
                .and_modify(|v| {
                    if v.as_deref() != Some(qn) {
                        *v = None
                    }
                })
                .or_insert_with(|| Some(qn.to_string()));
        }
        table
    }

    pub fn from_api_graph(graph: &ApiGraph) -> Self {
        Self::from_entities(graph.entities.values())
    }

    /// Types among `entities`.
    pub fn from_entities<'a>(entities: impl IntoIterator<Item = &'a ApiEntity>) -> Self {
        Self::from_qualified_names(
            entities
                .into_iter()
                .filter(|e| e.kind.is_type())
                .map(|e| e.qualified_name.as_str()),
        )
    }

    pub fn resolve(&self, simple: &str) -> Option<&str> {
        self.simple.get(simple).and_then(|v| v.as_deref())
    }

    pub fn is_qualified_type(&self, qn: &str) -> bool {
        self.qualified.contains_key(qn)
    }
}

/// One call in a snippet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    /// Method name with "()" appended; constructors use the type name.
    pub name: String,
    pub receiver: Option<String>,
    pub container: Option<String>,
    pub arg_count: u32,
}

impl CallSite {
    pub fn packet(&self) -> ApiPacket {
        ApiPacket::new(self.name.clone(), self.container.as_deref(), Some(self.arg_count))
    }
}

fn import_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\bimport\s+(?:static\s+)?([A-Za-z_$][\w$.]*)\s*;").unwrap())
}

fn decl_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\b([A-Z][\w$]*)\s*(?:<[^;=()]*>)?\s*(?:\[\s*\])*\s+([a-z_$][\w$]*)\s*(?:=|;|:|,|\))")
            .unwrap()
    })
}

fn call_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(\bnew\s+)?([A-Za-z_$][\w$]*(?:\s*\.\s*[A-Za-z_$][\w$]*)*)\s*(?:<[^()]*>)?\s*\(")
            .unwrap()
    })
}

/// Top-level argument count of the list opened at byte `open` (0 for
/// "()"); commas inside nested parentheses, brackets or quotes are ignored.
pub fn count_args(text: &str, open: usize) -> Option<u32> {
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    let mut commas = 0u32;
    let mut any = false;
    for (off, c) in text[open..].char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' | '\'' => {
                quote = Some(c);
                any = true;
            }
            '(' | '[' | '{' => {
                depth += 1;
                if depth > 1 {
                    any = true;
                }
            }
            ')' | ']' | '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(if any { commas + 1 } else { 0 });
                }
            }
            ',' if depth == 1 => commas += 1,
            c if !c.is_whitespace() && off > 0 => any = true,
            _ => {}
        }
    }
    None
}

/// Remove comments and blank out string literals, keeping byte offsets.
fn mask_code(code: &str) -> String {
    let mut out = String::with_capacity(code.len());
    let mut chars = code.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        match c {
            '/' if chars.peek().map(|p| p.1) == Some('/') => {
                out.push(' ');
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        out.push('\n');
                        break;
                    }
                    out.extend(std::iter::repeat_n(' ', c.len_utf8()));
                }
            }
            '/' if chars.peek().map(|p| p.1) == Some('*') => {
                out.push(' ');
                let mut prev = ' ';
                for (_, c) in chars.by_ref() {
                    out.extend(std::iter::repeat_n(if c == '\n' { '\n' } else { ' ' }, if c == '\n' { 1 } else { c.len_utf8() }));
                    if prev == '*' && c == '/' {
                        break;
                    }
                    prev = c;
                }
            }
            '"' | '\'' => {
                out.push(c);
                let mut escaped = false;
                for (_, d) in chars.by_ref() {
                    if escaped {
                        escaped = false;
                        out.extend(std::iter::repeat_n('x', d.len_utf8()));
                        continue;
                    }
                    if d == '\\' {
                        escaped = true;
                        out.push('x');
                        continue;
                    }
                    if d == c {
                        out.push(c);
                        break;
                    }
                    out.extend(std::iter::repeat_n('x', d.len_utf8()));
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Resolution context for one snippet.
#[derive(Debug, Clone)]
pub struct SnippetResolver<'a> {
    types: &'a TypeTable,
    imports: HashMap<String, String>,
    vars: HashMap<String, String>,
    masked: String,
}

impl<'a> SnippetResolver<'a> {
    pub fn new(code: &str, types: &'a TypeTable) -> Self {
        let masked = mask_code(code);
        let imports = import_re()
            .captures_iter(&masked)
            .map(|c| {
                let qn = c[1].to_string();
                (qn.rsplit('.').next().unwrap_or(&qn).to_string(), qn)
            })
            .collect();
        let mut vars = HashMap::new();
        for c in decl_re().captures_iter(&masked) {
            vars.entry(c[2].to_string()).or_insert_with(|| c[1].to_string());
        }
        SnippetResolver {
            types,
            imports,
            vars,
            masked,
        }
    }

    /// Qualified name of a type written in the snippet or in prose.
    pub fn qualify_type(&self, name: &str) -> Option<String> {
        if let Some(qn) = self.imports.get(name) {
            return Some(qn.clone());
        }
        if let Some(qn) = self.types.resolve(name) {
            return Some(qn.to_string());
        }
        if name.contains('.') && self.types.is_qualified_type(name) {
            return Some(name.to_string());
        }
        None
    }

    pub fn var_type(&self, var: &str) -> Option<&str> {
        self.vars.get(var).map(String::as_str)
    }

    /// Resolve a receiver expression ("list", "Collections",
    /// "java.util.Arrays") to a qualified type name.
    pub fn resolve_receiver(&self, receiver: &str) -> Option<String> {
        if let Some(t) = self.var_type(receiver) {
            return self.qualify_type(t);
        }
        if receiver.contains('.') {
            return self.types.is_qualified_type(receiver).then(|| receiver.to_string());
        }
        self.qualify_type(receiver)
    }

    /// Every call site in snippet order.
    pub fn call_sites(&self, keywords: &[String]) -> Vec<CallSite> {
        let text = &self.masked;
        let mut sites = Vec::new();
        for caps in call_re().captures_iter(text) {
            let whole = caps.get(0).expect("match");
            let path: String = caps[2].chars().filter(|c| !c.is_whitespace()).collect();
            let is_new = caps.get(1).is_some();
            let open = whole.end() - 1;
            let Some(arg_count) = count_args(text, open) else { continue };
            let (qualifier, name) = match path.rsplit_once('.') {
                Some((q, n)) => (Some(q.to_string()), n.to_string()),
                None => (None, path.clone()),
            };
            if CONTROL_WORDS.contains(&name.as_str()) || keywords.iter().any(|k| *k == name) {
                continue;
            }
            if is_new {
                let simple = name.clone();
                sites.push(CallSite {
                    name: format!("{simple}()"),
                    receiver: None,
                    container: self.qualify_type(&path),
                    arg_count,
                });
                continue;
            }
            let chained = text[..whole.start()].trim_end().ends_with('.');
            let (receiver, container) = match (&qualifier, chained) {
                (_, true) => (None, None),
                (Some(q), false) => (Some(q.clone()), self.resolve_receiver(q)),
                (None, false) => (None, None),
            };
            // A declaration like "List<String> list = ..." is not a call;
            // a method declaration "void run() {" is skipped likewise.
            if qualifier.is_none() && self.is_declaration(whole.start()) {
                continue;
            }
            sites.push(CallSite {
                name: format!("{name}()"),
                receiver,
                container,
                arg_count,
            });
        }
        sites
    }

    /// Whether the identifier at `start` is preceded by a type (method
    /// declaration header).
    fn is_declaration(&self, start: usize) -> bool {
        let before = self.masked[..start].trim_end();
        let prev = before
            .rsplit(|c: char| !(c.is_alphanumeric() || c == '_' || c == '$' || c == '>' || c == '<' || c == ']' || c == '['))
            .next()
            .unwrap_or("");
        !prev.is_empty()
            && prev != "return"
            && !before.ends_with(['=', '(', ',', '!', '&', '|', '+', '-', '*', '/', '?', ':', ';', '{', '}'])
            && (prev.chars().next().is_some_and(|c| c.is_alphabetic()))
            && !CONTROL_WORDS.contains(&prev)
    }
}
