//! Skip-gram word embeddings with negative sampling.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc::TextProcessor;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid vector file at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub min_count: usize,
    pub negative: usize,
    pub learning_rate: f32,
    pub seed: u64,
    /// Train shards in parallel and average them. Faster, but the result
    /// depends on the shard count and is not used for golden builds.
    pub parallel: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 128,
            window: 5,
            epochs: 30,
            min_count: 1,
            negative: 5,
            learning_rate: 0.025,
            seed: 7,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
}

const UNIGRAM_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f32 = 1e-4;

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

struct Trainer<'a> {
    cfg: &'a EmbeddingConfig,
    input: Vec<f32>,
    output: Vec<f32>,
    cumulative: Vec<f64>,
    rng: ChaCha8Rng,
}

impl Trainer<'_> {
    fn sample_negative(&mut self) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = self.rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }

    fn update(&mut self, center: usize, context: usize, lr: f32, grad: &mut [f32]) {
        let d = self.cfg.dim;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for k in 0..=self.cfg.negative {
            let (target, label) = if k == 0 {
                (context, 1.0)
            } else {
                let t = self.sample_negative();
                if t == context {
                    continue;
                }
                (t, 0.0)
            };
            let (inp, out) = (&self.input[center * d..(center + 1) * d], &mut self.output[target * d..(target + 1) * d]);
            let dot: f32 = inp.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
            let g = (label - sigmoid(dot)) * lr;
            for i in 0..d {
                grad[i] += g * out[i];
                out[i] += g * inp[i];
            }
        }
        let inp = &mut self.input[center * d..(center + 1) * d];
        for i in 0..d {
            inp[i] += grad[i];
        }
    }
}

impl Trainer<'_> {
    fn epoch(&mut self, encoded: &[Vec<usize>], step: &mut usize, total_steps: usize) {
        let cfg = self.cfg;
        let mut grad = vec![0.0f32; cfg.dim];
        for sent in encoded {
            for (i, &center) in sent.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - *step as f32 / total_steps as f32).max(MIN_LR_FRACTION);
                *step += 1;
                let span = if cfg.window > 1 { cfg.window - self.rng.random_range(0..cfg.window) } else { 1 };
                let lo = i.saturating_sub(span);
                let hi = (i + span).min(sent.len() - 1);
                for (j, &ctx) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                    if j != i {
                        self.update(center, ctx, lr, &mut grad);
                    }
                }
            }
        }
    }

    /// Parameter mixing: each epoch, shards of the corpus train copies of
    /// the current model in parallel and the copies are averaged.
    fn train_mixed(&mut self, encoded: &[Vec<usize>], total_steps: usize) {
        use rayon::prelude::*;
        let shards = rayon::current_num_threads().clamp(1, 8);
        let mut step = 0;
        for epoch in 0..self.cfg.epochs {
            let results: Vec<(Vec<f32>, Vec<f32>, usize)> = (0..shards)
                .into_par_iter()
                .map(|k| {
                    let part: Vec<Vec<usize>> = encoded.iter().skip(k).step_by(shards).cloned().collect();
                    let mut t = Trainer {
                        cfg: self.cfg,
                        input: self.input.clone(),
                        output: self.output.clone(),
                        cumulative: self.cumulative.clone(),
                        rng: ChaCha8Rng::seed_from_u64(self.cfg.seed ^ ((epoch * shards + k + 1) as u64)),
                    };
                    let mut local = step;
                    t.epoch(&part, &mut local, total_steps);
                    (t.input, t.output, local - step)
                })
                .collect();
            let n = results.len() as f32;
            for v in self.input.iter_mut().chain(self.output.iter_mut()) {
                *v = 0.0;
            }
            for (inp, out, steps) in &results {
                self.input.iter_mut().zip(inp).for_each(|(a, b)| *a += b / n);
                self.output.iter_mut().zip(out).for_each(|(a, b)| *a += b / n);
                step += steps;
            }
        }
    }
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Vector of a token; unknown tokens get the zero vector.
    pub fn vector(&self, token: &str) -> Vec<f32> {
        match self.index.get(token) {
            Some(&i) => self.vectors[i * self.dim..(i + 1) * self.dim].to_vec(),
            None => vec![0.0; self.dim],
        }
    }

    /// Mean of the token vectors (unknown tokens count as zero vectors).
    pub fn average(&self, tokens: &[String]) -> Vec<f64> {
        let mut sum = vec![0.0f64; self.dim];
        for t in tokens {
            if let Some(&i) = self.index.get(t) {
                for (s, v) in sum.iter_mut().zip(&self.vectors[i * self.dim..(i + 1) * self.dim]) {
                    *s += f64::from(*v);
                }
            }
        }
        if !tokens.is_empty() {
            let n = tokens.len() as f64;
            sum.iter_mut().for_each(|s| *s /= n);
        }
        sum
    }

    /// Cosine of the averaged token vectors; 0 when either is zero.
    pub fn token_similarity(&self, a: &[String], b: &[String]) -> f64 {
        cosine(&self.average(a), &self.average(b))
    }

    /// Train on pre-tokenized sentences.
    pub fn train_tokenized(sentences: &[Vec<String>], cfg: &EmbeddingConfig) -> Result<Self, EmbeddingError> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for s in sentences {
            for t in s {
                *counts.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut vocab: Vec<(&str, usize)> = counts.into_iter().filter(|(_, c)| *c >= cfg.min_count.max(1)).collect();
        if vocab.is_empty() {
            return Err(EmbeddingError::EmptyCorpus);
        }
        vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let index: HashMap<String, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (t.to_string(), i)).collect();
        let d = cfg.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let input: Vec<f32> = (0..vocab.len() * d).map(|_| (rng.random::<f32>() - 0.5) / d as f32).collect();
        let mut acc = 0.0;
        let cumulative: Vec<f64> = vocab
            .iter()
            .map(|(_, c)| {
                acc += (*c as f64).powf(UNIGRAM_POWER);
                acc
            })
            .collect();
        let mut trainer = Trainer {
            cfg,
            input,
            output: vec![0.0; vocab.len() * d],
            cumulative,
            rng,
        };
        let encoded: Vec<Vec<usize>> = sentences
            .iter()
            .map(|s| s.iter().filter_map(|t| index.get(t).copied()).collect())
            .collect();
        let total_steps = (cfg.epochs * encoded.iter().map(Vec::len).sum::<usize>()).max(1);

        if cfg.parallel {
            trainer.train_mixed(&encoded, total_steps);
        } else {
            let mut step = 0;
            for _ in 0..cfg.epochs {
                trainer.epoch(&encoded, &mut step, total_steps);
            }
        }
        Ok(EmbeddingModel {
            dim: d,
            vocab: vocab.into_iter().map(|(t, _)| t.to_string()).collect(),
            index,
            vectors: trainer.input,
        })
    }

    /// Text format: a "dim vocab" header, then one "token v1 .. vdim" row
    /// per token, tokens percent-escaped.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.dim, self.vocab.len());
        for (i, t) in self.vocab.iter().enumerate() {
            out.push_str(&utf8_percent_encode(t, TOKEN_ESCAPE).to_string());
            for v in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, EmbeddingError> {
        let err = |line: usize, message: &str| EmbeddingError::Format {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let mut h = header.split_whitespace().map(str::parse::<usize>);
        let (Some(Ok(dim)), Some(Ok(n)), None) = (h.next(), h.next(), h.next()) else {
            return Err(err(1, "header must be \"dim vocab\""));
        };
        let mut vocab = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * dim);
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(' ');
            let token = parts.next().ok_or_else(|| err(i + 2, "missing token"))?;
            let token = percent_decode_str(token)
                .decode_utf8()
                .map_err(|_| err(i + 2, "bad token escape"))?
                .into_owned();
            let row: Vec<f32> = parts
                .map(str::parse::<f32>)
                .collect::<Result<_, _>>()
                .map_err(|_| err(i + 2, "bad number"))?;
            if row.len() != dim {
                return Err(err(i + 2, "row length differs from dim"));
            }
            vocab.push(token);
            vectors.extend(row);
        }
        if vocab.len() != n {
            return Err(err(vocab.len() + 2, "vocabulary size differs from header"));
        }
        let index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(EmbeddingModel { dim, vocab, index, vectors })
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        std::fs::write(path, self.to_text()).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }
}

const TOKEN_ESCAPE: &AsciiSet = &CONTROLS.add(b' ').add(b'%');

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Tokenize and train.
pub fn train_embeddings(tp: &TextProcessor, corpus_sentences: &[String], cfg: &EmbeddingConfig) -> Result<EmbeddingModel, EmbeddingError> {
    let tokenized: Vec<Vec<String>> = corpus_sentences.iter().map(|s| tp.embedding_tokens(s)).collect();
    EmbeddingModel::train_tokenized(&tokenized, cfg)
}

/// Cosine similarity of the averaged token vectors of two texts.
pub fn sentence_similarity(tp: &TextProcessor, a: &str, b: &str, m: &EmbeddingModel) -> f64 {
    m.token_similarity(&tp.embedding_tokens(a), &tp.embedding_tokens(b))
}
