//! Corpus BLEU, human-evaluation tallies with MASI-based agreement, and
//! dataset statistics.
//!
//! BLEU is known to correlate poorly with human judgments of elaboration
//! quality; it is reported for comparability, alongside human preference
//! tallies.

mod bleu;
mod masi;
mod stats;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{
    brevity_penalty, corpus_bleu, corpus_bleu_with, modified_precision, BleuScore, EvalPair, Precision, Smoothing,
};
pub use masi::{jaccard, kappa_masi, kappa_masi_pairs, masi_distance};
pub use stats::{dataset_stats, LengthStats, SpecificityCorrelation, SplitSizes, StatsReport};

#[derive(Debug, Error, PartialEq)]
pub enum EvaluationError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("selection lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("agreement needs exactly two evaluators, found {0}")]
    EvaluatorCount(usize),
    #[error("instance {instance_id} has no rating from {evaluator_id}")]
    MissingRating { instance_id: String, evaluator_id: String },
    #[error("instance {instance_id} is rated twice by {evaluator_id}")]
    DuplicateRating { instance_id: String, evaluator_id: String },
}

/// Systems compared in human evaluation.
pub const DEFAULT_SYSTEMS: [&str; 3] = ["greedy", "top_k", "contextual"];

/// One evaluator's choice of the best systems for one instance; may be
/// empty when every output is poor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanEvalRecord {
    pub instance_id: String,
    pub evaluator_id: String,
    pub selected_systems: BTreeSet<String>,
}

/// Percentage of records selecting each system. Rows may sum past 100
/// because evaluators can select several systems.
pub fn tally_human_eval(records: &[HumanEvalRecord]) -> BTreeMap<String, f64> {
    let mut systems: BTreeMap<String, usize> = DEFAULT_SYSTEMS.iter().map(|s| (s.to_string(), 0)).collect();
    for r in records {
        for s in &r.selected_systems {
            *systems.entry(s.clone()).or_insert(0) += 1;
        }
    }
    let n = records.len();
    systems
        .into_iter()
        .map(|(s, c)| (s, if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 }))
        .collect()
}
