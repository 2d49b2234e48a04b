use super::{Sentence, TextProcessor, Token, TokenKind, PosTag};

const MAX_CALL_ARGS: usize = 160;
const MAX_GENERIC_ARGS: usize = 64;

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

fn char_at(text: &str, i: usize) -> Option<char> {
    text.get(i..).and_then(|s| s.chars().next())
}

fn scan_ident(text: &str, start: usize) -> usize {
    let mut j = start;
    for c in text[start..].chars() {
        if !is_ident_char(c) {
            break;
        }
        j += c.len_utf8();
    }
    j
}

/// Index just past the `>` closing the generic argument list opened at `open`.
fn match_angle(text: &str, open: usize) -> Option<usize> {
    let first = char_at(text, open + 1)?;
    if !(first.is_alphabetic() || first == '?') {
        return None;
    }
    let mut depth = 0usize;
    for (off, c) in text[open..].char_indices() {
        if off > MAX_GENERIC_ARGS {
            return None;
        }
        match c {
            '<' => depth += 1,
            '>' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + off + 1);
                }
            }
            c if is_ident_char(c) || matches!(c, ' ' | ',' | '?' | '.' | '[' | ']' | '&') => {}
            _ => return None,
        }
    }
    None
}

/// Index just past the `)` closing the argument list opened at `open`.
/// Quoted strings are skipped; newlines and very long spans abort.
fn match_paren(text: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (off, c) in text[open..].char_indices() {
        if off > MAX_CALL_ARGS || c == '\n' {
            return None;
        }
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
            '"' | '\'' => quote = Some(c),
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + off + 1);
                }
            }
            _ => {}
        }
    }
    None
}

#[derive(Debug, Default, Clone, Copy)]
struct Shape {
    dotted: bool,
    call: bool,
    generic: bool,
}

impl Shape {
    fn is_plain(self) -> bool {
        !(self.dotted || self.call || self.generic)
    }
}

/// Extent of an identifier chain starting at `start`: dotted segments,
/// generic arguments, array brackets and call parentheses.
fn scan_code_span(text: &str, start: usize) -> (usize, Shape) {
    let mut shape = Shape::default();
    let mut j = scan_ident(text, start);
    loop {
        let rest = &text[j..];
        if rest.starts_with('<') {
            if let Some(k) = match_angle(text, j) {
                j = k;
                shape.generic = true;
                continue;
            }
        }
        if rest.starts_with("[]") {
            j += 2;
            continue;
        }
        if rest.starts_with('(') {
            if let Some(k) = match_paren(text, j) {
                j = k;
                shape.call = true;
                continue;
            }
            break;
        }
        if rest.starts_with('.') && char_at(text, j + 1).is_some_and(is_ident_start) {
            j = scan_ident(text, j + 1);
            shape.dotted = true;
            continue;
        }
        break;
    }
    (j, shape)
}

/// Extend a plain word over an English contraction ("don't", "it's").
fn contraction_end(text: &str, end: usize) -> usize {
    if !text[end..].starts_with('\'') {
        return end;
    }
    let tail = scan_ident(text, end + 1);
    let len = tail - (end + 1);
    if (1..=2).contains(&len) && text[end + 1..tail].chars().all(|c| c.is_ascii_lowercase()) {
        tail
    } else {
        end
    }
}

impl TextProcessor {
    /// Software-aware tokenization. API-shaped substrings are single
    /// [`TokenKind::ApiToken`]s; configured programming keywords are
    /// [`TokenKind::CodeKeyword`]s.
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        self.tokenize_with(text, true)
    }

    /// Tokenize text that is known not to start a sentence.
    pub(crate) fn tokenize_fragment(&self, text: &str) -> Vec<Token> {
        self.tokenize_with(text, false)
    }

    fn tokenize_with(&self, text: &str, sentence_start: bool) -> Vec<Token> {
        let mut tokens = Vec::new();
        let mut at_start = sentence_start;
        let mut i = 0;
        while i < text.len() {
            let c = char_at(text, i).expect("index on char boundary");
            if c.is_whitespace() {
                i += c.len_utf8();
                continue;
            }
            let (end, kind) = if is_ident_start(c) {
                self.scan_word(text, i, at_start)
            } else if c.is_ascii_digit() {
                let mut j = i;
                while char_at(text, j).is_some_and(|c| c.is_ascii_digit()) {
                    j += 1;
                }
                if text[j..].starts_with('.') && char_at(text, j + 1).is_some_and(|c| c.is_ascii_digit()) {
                    j += 1;
                    while char_at(text, j).is_some_and(|c| c.is_ascii_digit()) {
                        j += 1;
                    }
                }
                (j, TokenKind::Number)
            } else {
                (i + c.len_utf8(), TokenKind::Punct)
            };
            let token = Token {
                text: text[i..end].to_string(),
                kind,
                pos: PosTag::OTHER,
                span: (i, end),
            };
            at_start = match kind {
                TokenKind::Punct => {
                    token.is_terminal()
                        || token.text == ":"
                        || (at_start && matches!(token.text.as_str(), "(" | "\"" | "'"))
                }
                _ => false,
            };
            tokens.push(token);
            i = end;
        }
        tokens
    }

    fn scan_word(&self, text: &str, i: usize, at_start: bool) -> (usize, TokenKind) {
        let ident_end = scan_ident(text, i);
        let first = &text[i..ident_end];
        let (end, shape) = scan_code_span(text, i);
        if self.is_code_keyword(first) && !text[ident_end..].starts_with('.') {
            return (ident_end, TokenKind::CodeKeyword);
        }
        if shape.is_plain() {
            let end = contraction_end(text, end);
            let word = &text[i..end];
            let kind = if self.orthography().is_api(word, at_start) {
                TokenKind::ApiToken
            } else {
                TokenKind::Word
            };
            return (end, kind);
        }
        if self.orthography().is_api(&text[i..end], at_start) {
            return (end, TokenKind::ApiToken);
        }
        // Not API-shaped after all (e.g. "e.g"): fall back to the first word.
        let kind = if self.orthography().is_api(first, at_start) {
            TokenKind::ApiToken
        } else {
            TokenKind::Word
        };
        (ident_end, kind)
    }

    /// Split on sentence-terminal punctuation. Candidate sentences starting
    /// with a coordinating conjunction are merged into their predecessor.
    /// Tokens are left untagged; see [`TextProcessor::sentences`].
    pub fn split_sentences(&self, text: &str) -> Vec<Sentence> {
        let tokens = self.tokenize(text);
        let mut groups: Vec<Vec<Token>> = Vec::new();
        let mut current: Vec<Token> = Vec::new();
        let mut iter = tokens.into_iter().peekable();
        while let Some(tok) = iter.next() {
            let close = tok.is_terminal() && !iter.peek().is_some_and(Token::is_terminal);
            current.push(tok);
            if close {
                groups.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            groups.push(current);
        }

        let mut merged: Vec<Vec<Token>> = Vec::new();
        for group in groups {
            let leads_with_conj = self
                .conjunctions()
                .iter()
                .any(|c| c.eq_ignore_ascii_case(&group[0].text));
            match merged.last_mut() {
                Some(prev) if leads_with_conj => prev.extend(group),
                _ => merged.push(group),
            }
        }

        merged
            .into_iter()
            .map(|tokens| {
                let start = tokens[0].span.0;
                let end = tokens[tokens.len() - 1].span.1;
                Sentence {
                    raw: text[start..end].to_string(),
                    tokens,
                    source_id: String::new(),
                    offset: start,
                }
            })
            .collect()
    }
}
