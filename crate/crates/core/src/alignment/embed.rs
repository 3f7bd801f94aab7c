//! Sentence embedding backends.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AlignError;
use crate::corpus::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceVector {
    pub values: Vec<f64>,
}

impl SentenceVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Maps a sentence to a fixed-dimension vector.
pub trait SentenceEmbedder {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<SentenceVector, AlignError>;
    /// Whether `embed` may be called from several threads at once.
    fn supports_concurrency(&self) -> bool {
        false
    }
}

/// Deterministic averaged token embedder built from hashed token vectors.
///
/// Each token's vector is drawn from a splitmix64 stream seeded with the
/// FNV-1a hash of the token, so identical tokens always share a vector and
/// sentences with overlapping vocabulary have high cosine similarity.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

pub const DEFAULT_HASH_DIM: usize = 128;

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_HASH_DIM, 0)
    }
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim, seed }
    }

    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut state = fnv1a(token.as_bytes()) ^ self.seed;
        (0..self.dim)
            .map(|_| {
                let bits = splitmix64(&mut state) >> 11;
                bits as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect()
    }
}

impl SentenceEmbedder for HashEmbedder {
    fn name(&self) -> &str {
        "hash"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<SentenceVector, AlignError> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(AlignError::EmptyText);
        }
        let mut sum = vec![0.0; self.dim];
        for token in &tokens {
            for (acc, v) in sum.iter_mut().zip(self.token_vector(token)) {
                *acc += v;
            }
        }
        let n = tokens.len() as f64;
        Ok(SentenceVector::new(sum.into_iter().map(|v| v / n).collect()))
    }

    fn supports_concurrency(&self) -> bool {
        true
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Averages pretrained word vectors read from a text file in the
/// word2vec/fastText `.vec` layout (optional `count dim` header, then
/// `word v1 v2 ...` per line). Out-of-vocabulary tokens are skipped.
#[derive(Debug, Clone)]
pub struct WordVectorEmbedder {
    name: String,
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl WordVectorEmbedder {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, AlignError> {
        let path = path.as_ref();
        let file = fs::File::open(path)
            .map_err(|e| AlignError::Backend(format!("{}: {e}", path.display())))?;
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| AlignError::Backend(e.to_string()))?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<f64> = parts
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| AlignError::Backend(format!("line {}: {e}", i + 1)))?;
            if i == 0 && values.len() == 1 && word.parse::<usize>().is_ok() {
                continue; // header
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(AlignError::Backend(format!(
                        "line {}: expected {d} components, found {}",
                        i + 1,
                        values.len()
                    )))
                }
                Some(_) => {}
            }
            vectors.insert(word.to_lowercase(), values);
        }
        let dim = dim.filter(|d| *d > 0).ok_or_else(|| {
            AlignError::Backend(format!("{}: no word vectors found", path.display()))
        })?;
        Ok(Self {
            name: format!("word-vectors:{}", path.display()),
            dim,
            vectors,
        })
    }
}

impl SentenceEmbedder for WordVectorEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<SentenceVector, AlignError> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(AlignError::EmptyText);
        }
        let mut sum = vec![0.0; self.dim];
        let mut known = 0usize;
        for vector in tokens.iter().filter_map(|t| self.vectors.get(t)) {
            known += 1;
            for (acc, v) in sum.iter_mut().zip(vector) {
                *acc += v;
            }
        }
        if known == 0 {
            return Err(AlignError::Backend(format!(
                "no in-vocabulary tokens in {text:?}"
            )));
        }
        Ok(SentenceVector::new(
            sum.into_iter().map(|v| v / known as f64).collect(),
        ))
    }

    fn supports_concurrency(&self) -> bool {
        true
    }
}
