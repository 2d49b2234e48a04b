use super::{PosTag, Sentence, TextProcessor, Token, VerbPhrase};

impl TextProcessor {
    /// Maximal runs `VB (DET|ADJ|NN|ADP)*` in a tagged sentence.
    pub fn extract_verb_phrases(&self, sentence: &Sentence) -> Vec<VerbPhrase> {
        verb_phrases(&sentence.tokens)
    }
}

pub(crate) fn verb_phrases(tokens: &[Token]) -> Vec<VerbPhrase> {
    let mut phrases = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].pos != PosTag::VB {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < tokens.len() && (tokens[j].pos.is_nominal() || tokens[j].pos == PosTag::ADP) {
            j += 1;
        }
        phrases.push(VerbPhrase {
            tokens: tokens[i..j].to_vec(),
        });
        i = j;
    }
    phrases
}
