//! Thresholded cosine alignment of original and simplified documents, and
//! extraction of unaligned simplified sentences as candidate elaborations.

mod embed;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArticleSet, Document};

pub use embed::{HashEmbedder, SentenceEmbedder, SentenceVector, WordVectorEmbedder, DEFAULT_HASH_DIM};
pub(crate) use embed::{fnv1a, splitmix64};

pub const DEFAULT_THRESHOLD: f64 = 0.55;
pub const DEFAULT_RADIUS: usize = 2;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding backend error: {0}")]
    Backend(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("threshold must be finite, got {0}")]
    BadThreshold(f64),
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(u: &SentenceVector, v: &SentenceVector) -> Result<f64, AlignError> {
    if u.dim() != v.dim() {
        return Err(AlignError::DimMismatch(u.dim(), v.dim()));
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(AlignError::ZeroVector);
    }
    let dot: f64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub original_index: usize,
    pub simplified_index: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    /// At most one pair per simplified sentence, ordered by simplified index.
    pub pairs: Vec<AlignedPair>,
    pub threshold: f64,
}

impl AlignmentResult {
    pub fn aligned_original(&self, simplified_index: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|p| p.simplified_index == simplified_index)
            .map(|p| p.original_index)
    }

    pub fn is_aligned(&self, simplified_index: usize) -> bool {
        self.aligned_original(simplified_index).is_some()
    }
}

/// Aligns each simplified sentence to its most similar original sentence,
/// keeping the pair only when that similarity reaches `threshold`.
/// Equal similarities resolve to the smaller original index.
pub fn align_vectors(
    original: &[SentenceVector],
    simplified: &[SentenceVector],
    threshold: f64,
) -> Result<AlignmentResult, AlignError> {
    if !threshold.is_finite() {
        return Err(AlignError::BadThreshold(threshold));
    }
    let mut pairs = Vec::new();
    for (j, s) in simplified.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (i, o) in original.iter().enumerate() {
            let sim = cosine(o, s)?;
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((i, sim));
            }
        }
        if let Some((i, sim)) = best.filter(|(_, sim)| *sim >= threshold) {
            pairs.push(AlignedPair {
                original_index: i,
                simplified_index: j,
                similarity: sim,
            });
        }
    }
    Ok(AlignmentResult { pairs, threshold })
}

pub fn embed_document(
    doc: &Document,
    embedder: &dyn SentenceEmbedder,
) -> Result<Vec<SentenceVector>, AlignError> {
    doc.texts().map(|t| embedder.embed(t)).collect()
}

pub fn align(
    original: &Document,
    simplified: &Document,
    threshold: f64,
    embedder: &dyn SentenceEmbedder,
) -> Result<AlignmentResult, AlignError> {
    let o = embed_document(original, embedder)?;
    let s = embed_document(simplified, embedder)?;
    align_vectors(&o, &s, threshold)
}

/// A simplified-document sentence with no aligned original sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateElaboration {
    pub candidate_id: String,
    pub set_id: String,
    pub sentence_index: usize,
    pub text: String,
    pub simplified_window: Vec<String>,
    pub original_window: Vec<String>,
}

pub fn candidate_id(set_id: &str, sentence_index: usize) -> String {
    format!("{set_id}:{sentence_index}")
}

/// Original-sentence indices aligned to the `radius` simplified neighbours on
/// each side of `sentence_index`, deduplicated and in document order.
pub fn original_window_indices(
    sentence_index: usize,
    alignment: &AlignmentResult,
    radius: usize,
) -> Vec<usize> {
    let lo = sentence_index.saturating_sub(radius);
    let hi = sentence_index + radius;
    (lo..=hi)
        .filter(|&j| j != sentence_index)
        .filter_map(|j| alignment.aligned_original(j))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Joined text of the original sentences aligned to the candidate's neighbours;
/// empty when none of them is aligned.
pub fn build_original_window(
    sentence_index: usize,
    alignment: &AlignmentResult,
    original: &Document,
    radius: usize,
) -> String {
    original_window_indices(sentence_index, alignment, radius)
        .into_iter()
        .map(|i| original.sentences[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Every unaligned simplified sentence of `set`, in document order, with its
/// simplified and original text regions attached.
pub fn extract_candidates(
    alignment: &AlignmentResult,
    set: &ArticleSet,
    radius: usize,
) -> Vec<CandidateElaboration> {
    let simplified = &set.simplified;
    (0..simplified.len())
        .filter(|&j| !alignment.is_aligned(j))
        .map(|j| {
            let lo = j.saturating_sub(radius);
            let hi = (j + radius).min(simplified.len() - 1);
            CandidateElaboration {
                candidate_id: candidate_id(&set.set_id, j),
                set_id: set.set_id.clone(),
                sentence_index: j,
                text: simplified.sentences[j].text.clone(),
                simplified_window: simplified.sentences[lo..=hi]
                    .iter()
                    .map(|s| s.text.clone())
                    .collect(),
                original_window: original_window_indices(j, alignment, radius)
                    .into_iter()
                    .map(|i| set.original.sentences[i].text.clone())
                    .collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub threshold: f64,
    pub radius: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            radius: DEFAULT_RADIUS,
        }
    }
}

/// Aligns one article set and returns its candidates.
pub fn extract_from_set(
    set: &ArticleSet,
    embedder: &dyn SentenceEmbedder,
    config: ExtractionConfig,
) -> Result<Vec<CandidateElaboration>, AlignError> {
    let alignment = align(&set.original, &set.simplified, config.threshold, embedder)?;
    Ok(extract_candidates(&alignment, set, config.radius))
}

/// Recorded next to every candidate file so extraction can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionMetadata {
    pub backend: String,
    pub dim: usize,
    pub threshold: f64,
    pub radius: usize,
    pub article_sets: usize,
    pub simplified_sentences: usize,
    pub candidates: usize,
}
