use serde::{Deserialize, Serialize};

use super::{Sentence, Span, TextProcessor, TokenKind};

/// An API mention in a sentence. `span` is relative to the text the
/// sentence was split from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub text: String,
    pub span: Span,
}

impl TextProcessor {
    /// Tokens inside code markup spans, plus orthographic API tokens
    /// elsewhere, in sentence order.
    pub fn detect_api_mentions(&self, sentence: &Sentence, markup: Option<&[Span]>) -> Vec<Mention> {
        let spans = markup.unwrap_or(&[]);
        let mut mentions = Vec::new();
        for tok in &sentence.tokens {
            let in_code = spans
                .iter()
                .any(|&(a, b)| tok.span.0 >= a && tok.span.1 <= b);
            let is_mention = if in_code {
                matches!(tok.kind, TokenKind::Word | TokenKind::ApiToken)
            } else {
                tok.kind == TokenKind::ApiToken
            };
            if is_mention {
                mentions.push(Mention {
                    text: tok.text.clone(),
                    span: tok.span,
                });
            }
        }
        mentions
    }

    /// Mentions in a short fragment such as a task object ("a List").
    pub fn fragment_mentions(&self, text: &str) -> Vec<Mention> {
        self.tokenize_fragment(text)
            .into_iter()
            .filter(|t| t.kind == TokenKind::ApiToken)
            .map(|t| Mention {
                text: t.text,
                span: t.span,
            })
            .collect()
    }
}
