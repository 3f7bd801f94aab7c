use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EvaluationError;
use crate::corpus::tokenize;

/// A generated elaboration and its gold reference, both tokenized with
/// the corpus tokenizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "EvalPairRecord")]
pub struct EvalPair {
    pub instance_id: String,
    pub candidate: Vec<String>,
    pub reference: Vec<String>,
}

/// Pair fields may be given as raw text or as token lists.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TextOrTokens {
    Text(String),
    Tokens(Vec<String>),
}

impl TextOrTokens {
    fn into_tokens(self) -> Vec<String> {
        match self {
            Self::Text(t) => tokenize(&t),
            Self::Tokens(ts) => ts.iter().flat_map(|t| tokenize(t)).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalPairRecord {
    instance_id: String,
    candidate: TextOrTokens,
    reference: TextOrTokens,
}

impl From<EvalPairRecord> for EvalPair {
    fn from(r: EvalPairRecord) -> Self {
        Self {
            instance_id: r.instance_id,
            candidate: r.candidate.into_tokens(),
            reference: r.reference.into_tokens(),
        }
    }
}

impl EvalPair {
    pub fn from_text(instance_id: impl Into<String>, candidate: &str, reference: &str) -> Self {
        Self {
            instance_id: instance_id.into(),
            candidate: tokenize(candidate),
            reference: tokenize(reference),
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub matches: usize,
    pub total: usize,
    pub value: f64,
}

/// Clipped n-gram matches pooled over the corpus, divided by the pooled
/// candidate n-gram count. No candidate n-grams gives 0.
pub fn modified_precision(pairs: &[EvalPair], n: usize) -> Result<Precision, EvaluationError> {
    if n == 0 {
        return Err(EvaluationError::InvalidOrder(n));
    }
    let mut matches = 0;
    let mut total = 0;
    for pair in pairs {
        let cand = ngram_counts(&pair.candidate, n);
        let reference = ngram_counts(&pair.reference, n);
        for (gram, count) in cand {
            total += count;
            matches += count.min(reference.get(gram).copied().unwrap_or(0));
        }
    }
    let value = if total == 0 {
        log::warn!("no candidate {n}-grams; precision defined as 0");
        0.0
    } else {
        matches as f64 / total as f64
    };
    Ok(Precision { matches, total, value })
}

/// 1 when the candidate is at least as long as the reference, otherwise
/// exp(1 - r/c); 0 for an empty candidate.
pub fn brevity_penalty(cand_len: usize, ref_len: usize) -> f64 {
    if cand_len == 0 {
        0.0
    } else if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    None,
    /// Zero match counts replaced by 0.1 (Chen and Cherry, method 1).
    Epsilon,
}

const SMOOTHING_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub n: usize,
    pub score: f64,
    pub score_x100: f64,
    pub precisions: Vec<Precision>,
    pub brevity_penalty: f64,
    pub candidate_length: usize,
    pub reference_length: usize,
    pub smoothing: Smoothing,
}

pub fn corpus_bleu(pairs: &[EvalPair], n: usize) -> Result<BleuScore, EvaluationError> {
    corpus_bleu_with(pairs, n, Smoothing::None)
}

/// Brevity penalty times the geometric mean of the modified 1..n-gram precisions.
pub fn corpus_bleu_with(pairs: &[EvalPair], n: usize, smoothing: Smoothing) -> Result<BleuScore, EvaluationError> {
    if pairs.is_empty() {
        return Err(EvaluationError::EmptyCorpus);
    }
    let precisions = (1..=n)
        .map(|i| modified_precision(pairs, i))
        .collect::<Result<Vec<_>, _>>()?;
    if precisions.is_empty() {
        return Err(EvaluationError::InvalidOrder(n));
    }
    let candidate_length: usize = pairs.iter().map(|p| p.candidate.len()).sum();
    let reference_length: usize = pairs.iter().map(|p| p.reference.len()).sum();
    let bp = brevity_penalty(candidate_length, reference_length);
    let mut log_sum = 0.0;
    let mut zero = false;
    for p in &precisions {
        let v = match smoothing {
            Smoothing::Epsilon if p.matches == 0 && p.total > 0 => SMOOTHING_EPSILON / p.total as f64,
            _ => p.value,
        };
        if v == 0.0 {
            zero = true;
            break;
        }
        log_sum += v.ln();
    }
    let score = if zero || bp == 0.0 {
        0.0
    } else {
        bp * (log_sum / n as f64).exp()
    };
    Ok(BleuScore {
        n,
        score,
        score_x100: score * 100.0,
        precisions,
        brevity_penalty: bp,
        candidate_length,
        reference_length,
        smoothing,
    })
}
