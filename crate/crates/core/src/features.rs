//! Tokenization and TF-IDF vectorization.
//!
//! The tokenizer defined here is the single tokenizer of the whole pipeline:
//! sentence token counts, lexicon matching, and feature extraction all agree
//! on it. TF-IDF uses the smoothed formula `idf(t) = ln((1+N)/(1+df(t))) + 1`
//! with optional sublinear tf and L2 normalization.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Sentence;

const FORMAT_VERSION: u32 = 1;

/// Lowercased word tokens: maximal runs of alphanumeric characters, with
/// hyphens and apostrophes kept when they sit between two such characters.
/// "AI-powered chatbot!" tokenizes to `["ai-powered", "chatbot"]`.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            // Some lowercase expansions carry combining marks (e.g. 'İ');
            // keeping only alphanumeric output makes tokenize idempotent.
            current.extend(c.to_lowercase().filter(char::is_alphanumeric));
        } else if (c == '-' || c == '\'')
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfidfConfig {
    pub sublinear_tf: bool,
    pub normalize: bool,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            sublinear_tf: false,
            normalize: true,
        }
    }
}

/// Bijective token <-> index map with contiguous indices.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_sorted(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.windows(2).all(|w| w[0] < w[1]));
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Sparse feature vector: strictly increasing indices, nonzero finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dim: usize,
}

impl SparseVector {
    pub fn new(entries: Vec<(usize, f64)>, dim: usize) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(i, v)| i < dim && v != 0.0 && v.is_finite()));
        SparseVector { entries, dim }
    }

    pub fn empty(dim: usize) -> Self {
        SparseVector {
            entries: Vec::new(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Fitted TF-IDF vocabulary and document-frequency weights.
#[derive(Debug, Clone)]
pub struct TfidfModel {
    vocabulary: Vocabulary,
    idf: Vec<f64>,
    config: TfidfConfig,
}

#[derive(Serialize, Deserialize)]
struct TfidfFile {
    format_version: u32,
    config: TfidfConfig,
    vocabulary: Vec<String>,
    idf: Vec<f64>,
}

/// Fit vocabulary and idf weights on training sentences only.
///
/// Vocabulary is every training token in lexicographic order;
/// `idf(t) = ln((1+N)/(1+df(t))) + 1` with N the sentence count and df the
/// number of sentences containing t.
pub fn fit_tfidf(train: &[Sentence], config: TfidfConfig) -> Result<TfidfModel> {
    let mut df: HashMap<String, usize> = HashMap::new();
    let n_docs = train.len();
    for sentence in train {
        let mut seen: Vec<String> = tokenize(&sentence.text);
        seen.sort_unstable();
        seen.dedup();
        for token in seen {
            *df.entry(token).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut tokens: Vec<String> = df.keys().cloned().collect();
    tokens.sort_unstable();
    let idf = tokens
        .iter()
        .map(|t| ((1.0 + n_docs as f64) / (1.0 + df[t] as f64)).ln() + 1.0)
        .collect();
    Ok(TfidfModel {
        vocabulary: Vocabulary::from_sorted(tokens),
        idf,
        config,
    })
}

impl TfidfModel {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn config(&self) -> TfidfConfig {
        self.config
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn transform(&self, sentence: &Sentence) -> SparseVector {
        self.transform_text(&sentence.text)
    }

    pub fn transform_text(&self, text: &str) -> SparseVector {
        let tokens = tokenize(text);
        self.transform_tokens(&tokens)
    }

    /// Vectorize an already-tokenized sentence. Out-of-vocabulary tokens are
    /// dropped; an all-OOV input yields the empty vector.
    pub fn transform_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for token in tokens {
            if let Some(idx) = self.vocabulary.index_of(token.as_ref()) {
                *counts.entry(idx).or_insert(0.0) += 1.0;
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(idx, count)| {
                let tf = if self.config.sublinear_tf {
                    1.0 + count.ln()
                } else {
                    count
                };
                (idx, tf * self.idf[idx])
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        let mut vector = SparseVector::new(entries, self.dimension());
        if self.config.normalize {
            let norm = vector.l2_norm();
            if norm > 0.0 {
                for entry in &mut vector.entries {
                    entry.1 /= norm;
                }
            }
        }
        vector
    }

    /// Mean transformed vector over a sentence set (dense). Used as the
    /// background for linear attributions.
    pub fn mean_vector(&self, sentences: &[Sentence]) -> Vec<f64> {
        let mut mean = vec![0.0; self.dimension()];
        if sentences.is_empty() {
            return mean;
        }
        for sentence in sentences {
            for (idx, value) in self.transform(sentence).iter() {
                mean[idx] += value;
            }
        }
        let n = sentences.len() as f64;
        for m in &mut mean {
            *m /= n;
        }
        mean
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = TfidfFile {
            format_version: FORMAT_VERSION,
            config: self.config,
            vocabulary: self.vocabulary.tokens.clone(),
            idf: self.idf.clone(),
        };
        let json = serde_json::to_string_pretty(&file).expect("tfidf model serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<TfidfModel> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let file: TfidfFile = serde_json::from_slice(&bytes).map_err(|e| Error::InvalidFormat {
            path: path.into(),
            message: e.to_string(),
        })?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::InvalidFormat {
                path: path.into(),
                message: format!("unsupported format_version {}", file.format_version),
            });
        }
        if file.idf.len() != file.vocabulary.len() {
            return Err(Error::InvalidFormat {
                path: path.into(),
                message: "idf length does not match vocabulary length".into(),
            });
        }
        let mut sorted = file.vocabulary.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != file.vocabulary {
            return Err(Error::InvalidFormat {
                path: path.into(),
                message: "vocabulary is not sorted and unique".into(),
            });
        }
        Ok(TfidfModel {
            vocabulary: Vocabulary::from_sorted(file.vocabulary),
            idf: file.idf,
            config: file.config,
        })
    }
}
