//! Pattern DSL compiler and matcher.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::RelationCategory;
use crate::resources::{self, ResourceError};
use crate::textproc::{Mention, PosTag, Sentence, StemMap, Token, TokenKind};

/// Largest number of tokens skipped between two consecutive elements.
pub const MAX_GAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pattern syntax error at column {position}: {message}")]
pub struct PatternSyntaxError {
    /// 1-based character column in the pattern text.
    pub position: usize,
    pub message: String,
}

fn syntax(position: usize, message: impl Into<String>) -> PatternSyntaxError {
    PatternSyntaxError {
        position,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wildcard {
    VB,
    VBN,
    NP,
    ADP,
    ADV,
    PRON,
}

impl Wildcard {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "VB" => Wildcard::VB,
            "VBN" => Wildcard::VBN,
            "NP" => Wildcard::NP,
            "ADP" => Wildcard::ADP,
            "ADV" => Wildcard::ADV,
            "PRON" => Wildcard::PRON,
            _ => return None,
        })
    }

    fn as_str(self) -> &'static str {
        match self {
            Wildcard::VB => "VB",
            Wildcard::VBN => "VBN",
            Wildcard::NP => "NP",
            Wildcard::ADP => "ADP",
            Wildcard::ADV => "ADV",
            Wildcard::PRON => "PRON",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Element {
    Slot(u8),
    Pos(Wildcard),
    /// Alternatives, each a sequence of words.
    Keyword(Vec<Vec<String>>),
    Optional(Vec<Element>),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Slot(n) => write!(f, "AE{n}"),
            Element::Pos(w) => f.write_str(w.as_str()),
            Element::Keyword(alts) if alts.len() == 1 => f.write_str(&alts[0].join(" ")),
            Element::Keyword(alts) => {
                let alts: Vec<String> = alts.iter().map(|a| a.join(" ")).collect();
                write!(f, "[{}]", alts.join("/"))
            }
            Element::Optional(inner) => {
                let inner: Vec<String> = inner.iter().map(Element::to_string).collect();
                write!(f, "({})", inner.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePattern {
    pub id: String,
    pub category: RelationCategory,
    pub elements: Vec<Element>,
}

/// Flat element sequence without optional groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Atom {
    Slot(u8),
    Pos(Wildcard),
    Keyword(Vec<Vec<String>>),
}

impl Atom {
    /// Comparison key; alternations compare as sets.
    fn key(&self) -> String {
        match self {
            Atom::Slot(n) => format!("AE{n}"),
            Atom::Pos(w) => w.as_str().to_string(),
            Atom::Keyword(alts) => {
                let mut a: Vec<String> = alts.iter().map(|w| w.join(" ").to_lowercase()).collect();
                a.sort();
                format!("[{}]", a.join("/"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Open(char),
    Close(char),
    Word(&'a str),
}

fn lex<'a>(spec: &'a str) -> Vec<(usize, Tok<'a>)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let flush = |out: &mut Vec<(usize, Tok<'a>)>, start: &mut Option<usize>, end: usize| {
        if let Some(s) = start.take() {
            out.push((s, Tok::Word(&spec[s..end])));
        }
    };
    for (i, c) in spec.char_indices() {
        match c {
            '(' | '[' => {
                flush(&mut out, &mut start, i);
                out.push((i, Tok::Open(c)));
            }
            ')' | ']' => {
                flush(&mut out, &mut start, i);
                out.push((i, Tok::Close(c)));
            }
            c if c.is_whitespace() => flush(&mut out, &mut start, i),
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    flush(&mut out, &mut start, spec.len());
    out
}

struct Parser<'a> {
    spec: &'a str,
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    slots: [Option<usize>; 2],
}

impl<'a> Parser<'a> {
    fn column(&self, byte: usize) -> usize {
        self.spec[..byte].chars().count() + 1
    }

    fn error_at(&self, byte: usize, message: impl Into<String>) -> PatternSyntaxError {
        syntax(self.column(byte), message)
    }

    fn sequence(&mut self, until: Option<(char, usize)>) -> Result<Vec<Element>, PatternSyntaxError> {
        let mut elements = Vec::new();
        while let Some(&(at, tok)) = self.toks.get(self.pos) {
            self.pos += 1;
            match tok {
                Tok::Close(')') if until.is_some_and(|(c, _)| c == ')') => return Ok(elements),
                Tok::Close(c) => return Err(self.error_at(at, format!("unexpected '{c}'"))),
                Tok::Open('(') => {
                    let inner = self.sequence(Some((')', at)))?;
                    if inner.is_empty() {
                        return Err(self.error_at(at, "empty optional group"));
                    }
                    elements.push(Element::Optional(inner));
                }
                Tok::Open(_) => elements.push(self.alternation(at)?),
                Tok::Word(w) => elements.push(self.word(at, w)?),
            }
        }
        match until {
            Some((c, at)) => Err(self.error_at(at, format!("unclosed group, expected '{c}'"))),
            None => Ok(elements),
        }
    }

    fn alternation(&mut self, open: usize) -> Result<Element, PatternSyntaxError> {
        let mut words: Vec<(usize, &str)> = Vec::new();
        loop {
            match self.toks.get(self.pos) {
                Some(&(_, Tok::Close(']'))) => {
                    self.pos += 1;
                    break;
                }
                Some(&(at, Tok::Word(w))) => {
                    words.push((at, w));
                    self.pos += 1;
                }
                Some(&(at, _)) => return Err(self.error_at(at, "groups cannot nest inside an alternation")),
                None => return Err(self.error_at(open, "unclosed alternation, expected ']'")),
            }
        }
        if words.is_empty() {
            return Err(self.error_at(open, "empty alternation"));
        }
        let inner = &self.spec[words[0].0..words.last().map(|(a, w)| a + w.len()).unwrap_or(open)];
        let mut alts = Vec::new();
        let mut offset = words[0].0;
        for alt in inner.split('/') {
            let ws: Vec<String> = alt.split_whitespace().map(str::to_string).collect();
            if ws.is_empty() {
                return Err(self.error_at(offset, "empty alternative"));
            }
            if let Some(w) = ws.iter().find(|w| is_reserved(w)) {
                return Err(self.error_at(offset, format!("{w} is not allowed inside an alternation")));
            }
            alts.push(ws);
            offset += alt.len() + 1;
        }
        Ok(Element::Keyword(alts))
    }

    fn word(&mut self, at: usize, w: &str) -> Result<Element, PatternSyntaxError> {
        if let Some(n) = w.strip_prefix("AE") {
            let slot = match n {
                "1" => 0,
                "2" => 1,
                _ => return Err(self.error_at(at, format!("unknown slot {w}"))),
            };
            if self.slots[slot].is_some() {
                return Err(self.error_at(at, format!("{w} appears twice")));
            }
            self.slots[slot] = Some(at);
            return Ok(Element::Slot(slot as u8 + 1));
        }
        if let Some(wc) = Wildcard::parse(w) {
            return Ok(Element::Pos(wc));
        }
        if w.contains('/') {
            return Err(self.error_at(at, "alternatives must be enclosed in [ ]"));
        }
        Ok(Element::Keyword(vec![vec![w.to_string()]]))
    }
}

fn is_reserved(w: &str) -> bool {
    w.starts_with("AE") && w[2..].chars().all(|c| c.is_ascii_digit()) || Wildcard::parse(w).is_some()
}

fn contains_slot(elements: &[Element]) -> bool {
    elements.iter().any(|e| match e {
        Element::Slot(_) => true,
        Element::Optional(inner) => contains_slot(inner),
        _ => false,
    })
}

/// Compile a template such as `AE1 opposite (ADP) AE2`.
pub fn compile_template(category: RelationCategory, template: &str, id: &str) -> Result<SentencePattern, PatternSyntaxError> {
    let mut p = Parser {
        spec: template,
        toks: lex(template),
        pos: 0,
        slots: [None, None],
    };
    let elements = p.sequence(None)?;
    for (i, slot) in p.slots.iter().enumerate() {
        if slot.is_none() {
            return Err(syntax(template.chars().count() + 1, format!("missing AE{}", i + 1)));
        }
    }
    for e in &elements {
        if let Element::Optional(inner) = e {
            if contains_slot(inner) {
                return Err(syntax(1, "API entity slots cannot be optional"));
            }
        }
    }
    Ok(SentencePattern {
        id: id.to_string(),
        category,
        elements,
    })
}

/// Compile one DSL line, `CATEGORY :: template`.
pub fn compile_pattern(spec: &str, id: &str) -> Result<SentencePattern, PatternSyntaxError> {
    let (cat, template) = spec
        .split_once("::")
        .ok_or_else(|| syntax(1, "expected CATEGORY :: template"))?;
    let category = RelationCategory::from_str(cat.trim()).map_err(|_| syntax(1, format!("unknown category {:?}", cat.trim())))?;
    let offset = spec[..spec.len() - template.len()].chars().count();
    compile_template(category, template, id).map_err(|mut e| {
        e.position += offset;
        e
    })
}

impl SentencePattern {
    pub fn template(&self) -> String {
        self.elements.iter().map(Element::to_string).collect::<Vec<_>>().join(" ")
    }

    /// Every way of including or skipping the optional groups, groups
    /// included first.
    fn variants(&self) -> Vec<Vec<Atom>> {
        fn expand(elements: &[Element]) -> Vec<Vec<Atom>> {
            let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
            for e in elements {
                acc = match e {
                    Element::Slot(n) => push_all(acc, Atom::Slot(*n)),
                    Element::Pos(w) => push_all(acc, Atom::Pos(*w)),
                    Element::Keyword(k) => push_all(acc, Atom::Keyword(k.clone())),
                    Element::Optional(inner) => {
                        let inner = expand(inner);
                        let mut next = Vec::new();
                        for prefix in &acc {
                            for tail in &inner {
                                next.push(prefix.iter().chain(tail).cloned().collect());
                            }
                            next.push(prefix.clone());
                        }
                        next
                    }
                };
            }
            acc
        }
        fn push_all(mut acc: Vec<Vec<Atom>>, a: Atom) -> Vec<Vec<Atom>> {
            acc.iter_mut().for_each(|v| v.push(a.clone()));
            acc
        }
        expand(&self.elements)
    }

    /// All elements with optional groups opened, for subsumption checks.
    fn full_keys(&self) -> Vec<String> {
        self.variants().into_iter().next().unwrap_or_default().iter().map(Atom::key).collect()
    }
}

/// Ordered pattern list, as loaded from a DSL file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    pub patterns: Vec<SentencePattern>,
}

impl PatternSet {
    pub fn shipped() -> Self {
        Self::parse(resources::PATTERNS, "patterns.dsl").expect("shipped patterns are valid")
    }

    /// Patterns get ids `P1`, `P2`, ... in file order.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, ResourceError> {
        let mut patterns = Vec::new();
        for (line_no, line) in resources::content_lines(text) {
            let id = format!("P{}", patterns.len() + 1);
            let p = compile_pattern(line, &id).map_err(|e| ResourceError::syntax(source_name, line_no, e.to_string()))?;
            patterns.push(p);
        }
        Ok(PatternSet { patterns })
    }

    pub fn load(path: Option<&std::path::Path>) -> Result<Self, ResourceError> {
        match path {
            Some(p) => Self::parse(&resources::read(p)?, &p.display().to_string()),
            None => Ok(Self::shipped()),
        }
    }

    pub fn get(&self, id: &str) -> Option<&SentencePattern> {
        self.patterns.iter().find(|p| p.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternMatch {
    pub category: RelationCategory,
    pub mention1: Mention,
    pub mention2: Mention,
    pub pattern_id: String,
}

struct Matcher<'a> {
    tokens: &'a [Token],
    is_mention: Vec<bool>,
    stems: &'a StemMap,
}

impl Matcher<'_> {
    fn gap_ok(&self, i: usize) -> bool {
        let t = &self.tokens[i];
        !self.is_mention[i] && !t.is_terminal() && t.pos != PosTag::PRON
    }

    fn plain(&self, i: usize) -> bool {
        i < self.tokens.len() && !self.is_mention[i]
    }

    /// End positions of `atom` anchored at `i`.
    fn ends(&self, atom: &Atom, i: usize) -> Vec<usize> {
        let n = self.tokens.len();
        if i >= n {
            return Vec::new();
        }
        let t = &self.tokens[i];
        match atom {
            Atom::Slot(_) => if self.is_mention[i] { vec![i + 1] } else { vec![] },
            Atom::Pos(w) => {
                if self.is_mention[i] {
                    return vec![];
                }
                let ok = match w {
                    Wildcard::VB => t.pos.is_verb(),
                    Wildcard::VBN => t.pos == PosTag::VBN,
                    Wildcard::ADP => t.pos == PosTag::ADP,
                    Wildcard::ADV => t.pos == PosTag::ADV,
                    Wildcard::PRON => t.pos == PosTag::PRON,
                    Wildcard::NP => {
                        let mut j = i;
                        while self.plain(j) && matches!(self.tokens[j].pos, PosTag::DET | PosTag::ADJ | PosTag::NN | PosTag::NpPart) {
                            j += 1;
                        }
                        return if j > i { vec![j] } else { vec![] };
                    }
                };
                if ok { vec![i + 1] } else { vec![] }
            }
            Atom::Keyword(alts) => {
                let mut out = Vec::new();
                for alt in alts {
                    let fits = alt.iter().enumerate().all(|(k, w)| {
                        self.plain(i + k)
                            && self.tokens[i + k].kind != TokenKind::Punct
                            && self.stems.keyword_matches(w, &self.tokens[i + k].text)
                    });
                    if fits && !out.contains(&(i + alt.len())) {
                        out.push(i + alt.len());
                    }
                }
                out
            }
        }
    }

    /// Match `atoms` with the first one anchored at `i`; returns the token
    /// positions of AE1 and AE2.
    fn run(&self, atoms: &[Atom], i: usize, slots: [Option<usize>; 2]) -> Option<[Option<usize>; 2]> {
        let (atom, rest) = atoms.split_first()?;
        for end in self.ends(atom, i) {
            let mut slots = slots;
            if let Atom::Slot(n) = atom {
                slots[usize::from(*n) - 1] = Some(i);
            }
            if rest.is_empty() {
                return Some(slots);
            }
            let mut next = end;
            loop {
                if let Some(found) = self.run(rest, next, slots) {
                    return Some(found);
                }
                if next >= self.tokens.len() || next - end >= MAX_GAP || !self.gap_ok(next) {
                    break;
                }
                next += 1;
            }
        }
        None
    }
}

fn is_subsequence(short: &[String], long: &[String]) -> bool {
    let mut it = long.iter();
    short.iter().all(|s| it.any(|l| l == s))
}

/// Every pattern match in a tagged sentence whose API mentions are given.
/// Each pattern contributes its leftmost match. A match is dropped when a
/// longer pattern whose template contains it matched the same mentions.
pub fn match_patterns(sentence: &Sentence, mentions: &[Mention], patterns: &PatternSet, stems: &StemMap) -> Vec<PatternMatch> {
    let tokens = &sentence.tokens;
    let is_mention: Vec<bool> = tokens.iter().map(|t| mentions.iter().any(|m| m.span == t.span)).collect();
    let matcher = Matcher {
        tokens,
        is_mention,
        stems,
    };
    let mention_at = |i: usize| {
        mentions
            .iter()
            .find(|m| m.span == tokens[i].span)
            .cloned()
            .expect("slot bound to a mention token")
    };
    let mut found: Vec<(PatternMatch, Vec<String>)> = Vec::new();
    for pattern in &patterns.patterns {
        let variants = pattern.variants();
        let hit = (0..tokens.len()).find_map(|i| variants.iter().find_map(|v| matcher.run(v, i, [None, None])));
        if let Some([Some(a), Some(b)]) = hit {
            found.push((
                PatternMatch {
                    category: pattern.category,
                    mention1: mention_at(a),
                    mention2: mention_at(b),
                    pattern_id: pattern.id.clone(),
                },
                pattern.full_keys(),
            ));
        }
    }
    let same_mentions = |x: &PatternMatch, y: &PatternMatch| x.mention1 == y.mention1 && x.mention2 == y.mention2;
    found
        .iter()
        .filter(|(m, keys)| {
            !found.iter().any(|(other, other_keys)| {
                same_mentions(m, other) && other_keys.len() > keys.len() && is_subsequence(keys, other_keys)
            })
        })
        .map(|(m, _)| m.clone())
        .collect()
}
