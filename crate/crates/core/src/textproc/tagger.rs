use super::{PosTag, TextProcessor, Token, TokenKind};

fn suffix_tag(lower: &str) -> PosTag {
    let n = lower.chars().count();
    if n > 4 && lower.ends_with("ly") {
        PosTag::ADV
    } else if n > 4 && lower.ends_with("ed") {
        PosTag::VBN
    } else if n > 5 && lower.ends_with("ing") {
        PosTag::VB
    } else if ["able", "ible", "ous", "ful", "less", "ive"]
        .iter()
        .any(|s| n > s.len() + 2 && lower.ends_with(s))
    {
        PosTag::ADJ
    } else {
        PosTag::NN
    }
}

impl TextProcessor {
    /// Tag an inflected verb form whose base form is a lexicon verb.
    fn inflected_verb(&self, lower: &str) -> Option<PosTag> {
        let lex = self.lexicon();
        let verb = |stem: &str| !stem.is_empty() && lex.is_verb(stem);
        let undouble = |stem: &str| {
            let b = stem.as_bytes();
            b.len() > 2 && b[b.len() - 1] == b[b.len() - 2] && verb(&stem[..stem.len() - 1])
        };
        if let Some(stem) = lower.strip_suffix("ies") {
            if verb(&format!("{stem}y")) {
                return Some(PosTag::VB);
            }
        }
        if let Some(stem) = lower.strip_suffix("es") {
            if verb(stem) {
                return Some(PosTag::VB);
            }
        }
        if let Some(stem) = lower.strip_suffix('s') {
            if !lower.ends_with("ss") && verb(stem) {
                return Some(PosTag::VB);
            }
        }
        if let Some(stem) = lower.strip_suffix("ied") {
            if verb(&format!("{stem}y")) {
                return Some(PosTag::VBN);
            }
        }
        if let Some(stem) = lower.strip_suffix("ed") {
            if verb(stem) || verb(&lower[..lower.len() - 1]) || undouble(stem) {
                return Some(PosTag::VBN);
            }
        }
        if let Some(stem) = lower.strip_suffix("ing") {
            if verb(stem) || verb(&format!("{stem}e")) || undouble(stem) {
                return Some(PosTag::VB);
            }
        }
        None
    }

    fn tag_word(&self, text: &str, prev: Option<PosTag>) -> PosTag {
        let lower = text.to_lowercase();
        let base = self
            .lexicon()
            .get(&lower)
            .or_else(|| self.inflected_verb(&lower))
            .unwrap_or_else(|| suffix_tag(&lower));
        match (base, prev) {
            // "the set", "a new list": a verb form right after a determiner
            // or adjective is nominal.
            (PosTag::VB, Some(PosTag::DET | PosTag::ADJ)) => PosTag::NN,
            (PosTag::VBN, Some(PosTag::DET)) => PosTag::ADJ,
            _ => base,
        }
    }

    /// Deterministic lexicon + suffix tagger.
    pub fn pos_tag(&self, mut tokens: Vec<Token>) -> Vec<Token> {
        let mut prev = None;
        for tok in tokens.iter_mut() {
            tok.pos = match tok.kind {
                TokenKind::ApiToken => PosTag::NN,
                TokenKind::Punct => PosTag::OTHER,
                TokenKind::Number => PosTag::NpPart,
                TokenKind::Word | TokenKind::CodeKeyword => self.tag_word(&tok.text, prev),
            };
            prev = Some(tok.pos);
        }
        tokens
    }
}
