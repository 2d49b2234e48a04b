use std::collections::{BTreeMap, HashSet};

use super::TaskKgError;
use crate::resources::{self, ResourceError};
use crate::textproc::{PosTag, TextProcessor, Token, TokenKind, VerbPhrase};

/// Scores how strongly a verb phrase expresses a programming task.
pub trait TaskClassifier: Send + Sync {
    fn score(&self, phrase: &VerbPhrase) -> Result<f64, TaskKgError>;
}

fn features(tokens: &[Token]) -> Vec<String> {
    let mut f = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let w = match t.kind {
            TokenKind::ApiToken => "<api>".to_string(),
            TokenKind::Number => "<num>".to_string(),
            _ => t.lower(),
        };
        if i == 0 {
            f.push(format!("head={w}"));
        }
        f.push(format!("w={w}"));
        f.push(format!("pos={:?}", t.pos));
    }
    f.push(format!("len={}", tokens.len().min(6)));
    f.sort();
    f.dedup();
    f
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Logistic regression over bag-of-words features, trained by full-batch
/// gradient descent from zero weights (deterministic).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    weights: BTreeMap<String, f64>,
    bias: f64,
}

const EPOCHS: usize = 400;
const LEARNING_RATE: f64 = 0.5;
const L2: f64 = 1e-3;

impl LinearClassifier {
    /// Parse "label<TAB>phrase" lines (label `task` or `other`).
    pub fn parse_labeled(text: &str, source_name: &str) -> Result<Vec<(bool, String)>, ResourceError> {
        resources::content_lines(text)
            .map(|(line, l)| {
                let (label, phrase) = l
                    .split_once('\t')
                    .ok_or_else(|| ResourceError::syntax(source_name, line, "expected label<TAB>phrase"))?;
                let label = match label.trim() {
                    "task" => true,
                    "other" => false,
                    other => {
                        return Err(ResourceError::syntax(source_name, line, format!("unknown label {other:?}")))
                    }
                };
                Ok((label, phrase.trim().to_string()))
            })
            .collect()
    }

    /// Tokens the classifier sees for a raw phrase: its first verb phrase,
    /// or all tokens when it has none.
    fn phrase_tokens(tp: &TextProcessor, phrase: &str) -> Vec<Token> {
        let tokens = tp.pos_tag(tp.tokenize(phrase));
        match crate::textproc::verb_phrases(&tokens).into_iter().next() {
            Some(vp) => vp.tokens,
            None => tokens,
        }
    }

    pub fn train(tp: &TextProcessor, examples: &[(bool, String)]) -> Self {
        let data: Vec<(f64, Vec<String>)> = examples
            .iter()
            .map(|(label, p)| (if *label { 1.0 } else { 0.0 }, features(&Self::phrase_tokens(tp, p))))
            .collect();
        let mut weights: BTreeMap<String, f64> = BTreeMap::new();
        for (_, f) in &data {
            for k in f {
                weights.entry(k.clone()).or_insert(0.0);
            }
        }
        let mut bias = 0.0;
        let n = data.len().max(1) as f64;
        for _ in 0..EPOCHS {
            let mut grad: BTreeMap<&str, f64> = BTreeMap::new();
            let mut grad_b = 0.0;
            for (y, f) in &data {
                let z = bias + f.iter().map(|k| weights[k]).sum::<f64>();
                let err = sigmoid(z) - y;
                grad_b += err;
                for k in f {
                    *grad.entry(k).or_insert(0.0) += err;
                }
            }
            for (k, w) in weights.iter_mut() {
                let g = grad.get(k.as_str()).copied().unwrap_or(0.0) / n + L2 * *w;
                *w -= LEARNING_RATE * g;
            }
            bias -= LEARNING_RATE * grad_b / n;
        }
        LinearClassifier { weights, bias }
    }

    /// Trained on the shipped labeled phrase file.
    pub fn shipped(tp: &TextProcessor) -> Self {
        let examples = Self::parse_labeled(resources::TASK_PHRASES, "task_phrases.tsv")
            .expect("shipped phrase file is valid");
        Self::train(tp, &examples)
    }

    pub fn score_tokens(&self, tokens: &[Token]) -> f64 {
        let z = self.bias
            + features(tokens)
                .iter()
                .filter_map(|k| self.weights.get(k))
                .sum::<f64>();
        sigmoid(z)
    }
}

impl TaskClassifier for LinearClassifier {
    fn score(&self, phrase: &VerbPhrase) -> Result<f64, TaskKgError> {
        if phrase.tokens.is_empty() {
            return Err(TaskKgError::EmptyPhrase);
        }
        Ok(self.score_tokens(&phrase.tokens))
    }
}

/// Rule fallback: an action-lexicon head verb followed by a noun.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleClassifier {
    action_verbs: HashSet<String>,
}

impl RuleClassifier {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(verbs: I) -> Self {
        RuleClassifier {
            action_verbs: verbs.into_iter().map(|v| v.into().to_lowercase()).collect(),
        }
    }

    fn base_form(&self, verb: &str) -> bool {
        let v = verb.to_lowercase();
        let candidates = [
            Some(v.clone()),
            v.strip_suffix("ies").map(|s| format!("{s}y")),
            v.strip_suffix("es").map(str::to_string),
            v.strip_suffix('s').map(str::to_string),
            v.strip_suffix("ing").map(str::to_string),
            v.strip_suffix("ing").map(|s| format!("{s}e")),
        ];
        candidates.into_iter().flatten().any(|c| self.action_verbs.contains(&c))
    }
}

impl TaskClassifier for RuleClassifier {
    fn score(&self, phrase: &VerbPhrase) -> Result<f64, TaskKgError> {
        let head = phrase.head_verb().ok_or(TaskKgError::EmptyPhrase)?;
        let has_noun = phrase.tokens[1..].iter().any(|t| t.pos == PosTag::NN);
        Ok(if self.base_form(&head.text) && has_noun { 1.0 } else { 0.0 })
    }
}
