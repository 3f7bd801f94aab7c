//! Verified elaborations with the document context every model needs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::CandidateElaboration;
use crate::annotation::{AggregatedLabel, DatasetSplits, SpecificityLevel};
use crate::corpus::ArticleSet;

/// Simplified sentences kept on each side of an elaboration. Covers the
/// largest classifier context (6 preceding) and the widest generation window
/// (4 on each side).
pub const MAX_CONTEXT_SENTENCES: usize = 6;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("no candidate record for {0}")]
    MissingCandidate(String),
    #[error("no article set {set_id} for candidate {candidate_id}")]
    MissingArticleSet { set_id: String, candidate_id: String },
    #[error("candidate {candidate_id}: sentence {index} is outside the simplified document")]
    IndexOutOfRange { candidate_id: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElaborationInstance {
    pub instance_id: String,
    pub set_id: String,
    pub sentence_index: usize,
    /// The gold elaboration sentence.
    pub text: String,
    pub specificity: Option<SpecificityLevel>,
    /// Up to [`MAX_CONTEXT_SENTENCES`] simplified sentences right before the
    /// elaboration, in document order.
    pub preceding: Vec<String>,
    /// Up to [`MAX_CONTEXT_SENTENCES`] simplified sentences right after it.
    pub following: Vec<String>,
    /// Original-document region aligned to the elaboration's neighbours.
    pub original_window: Vec<String>,
}

impl ElaborationInstance {
    pub fn from_candidate(
        candidate: &CandidateElaboration,
        set: &ArticleSet,
        specificity: Option<SpecificityLevel>,
    ) -> Result<Self, InstanceError> {
        let doc = &set.simplified;
        let i = candidate.sentence_index;
        if i >= doc.len() {
            return Err(InstanceError::IndexOutOfRange {
                candidate_id: candidate.candidate_id.clone(),
                index: i,
            });
        }
        let lo = i.saturating_sub(MAX_CONTEXT_SENTENCES);
        let hi = (i + 1 + MAX_CONTEXT_SENTENCES).min(doc.len());
        let texts = |range: std::ops::Range<usize>| -> Vec<String> {
            doc.sentences[range].iter().map(|s| s.text.clone()).collect()
        };
        Ok(Self {
            instance_id: candidate.candidate_id.clone(),
            set_id: candidate.set_id.clone(),
            sentence_index: i,
            text: doc.sentences[i].text.clone(),
            specificity,
            preceding: texts(lo..i),
            following: texts(i + 1..hi),
            original_window: candidate.original_window.clone(),
        })
    }

    /// The `k` sentences immediately before the elaboration (fewer near the start).
    pub fn preceding_k(&self, k: usize) -> &[String] {
        &self.preceding[self.preceding.len().saturating_sub(k)..]
    }

    /// The `k` sentences immediately after the elaboration (fewer near the end).
    pub fn following_k(&self, k: usize) -> &[String] {
        &self.following[..k.min(self.following.len())]
    }
}

/// Joins split labels with their candidate records and article sets.
pub fn build_instances(
    splits: DatasetSplits<AggregatedLabel>,
    candidates: &[CandidateElaboration],
    sets: &[ArticleSet],
) -> Result<DatasetSplits<ElaborationInstance>, InstanceError> {
    let by_id: HashMap<&str, &CandidateElaboration> =
        candidates.iter().map(|c| (c.candidate_id.as_str(), c)).collect();
    let by_set: HashMap<&str, &ArticleSet> = sets.iter().map(|s| (s.set_id.as_str(), s)).collect();
    splits.try_map(|label| {
        let candidate = by_id
            .get(label.candidate_id.as_str())
            .ok_or_else(|| InstanceError::MissingCandidate(label.candidate_id.clone()))?;
        let set = by_set
            .get(candidate.set_id.as_str())
            .ok_or_else(|| InstanceError::MissingArticleSet {
                set_id: candidate.set_id.clone(),
                candidate_id: candidate.candidate_id.clone(),
            })?;
        ElaborationInstance::from_candidate(candidate, set, label.specificity)
    })
}
