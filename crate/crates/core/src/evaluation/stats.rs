use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::alignment::CandidateElaboration;
use crate::annotation::{rank_correlation, AggregatedLabel, DatasetSplits, RankCorrelation, SpecificityHistogram};
use crate::corpus::{tokenize, ArticleSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub count: usize,
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub median: f64,
    /// token length -> number of elaborations
    pub histogram: BTreeMap<usize, usize>,
}

impl LengthStats {
    pub fn from_lengths(lengths: &[usize]) -> Option<Self> {
        if lengths.is_empty() {
            return None;
        }
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
        };
        let mut histogram = BTreeMap::new();
        for l in &sorted {
            *histogram.entry(*l).or_insert(0) += 1;
        }
        Some(Self {
            count: n,
            min: sorted[0],
            max: sorted[n - 1],
            mean: sorted.iter().sum::<usize>() as f64 / n as f64,
            median,
            histogram,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecificityCorrelation {
    pub kendall_tau_b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub article_sets: usize,
    /// Every document version, originals included.
    pub documents: usize,
    pub original_sentences: usize,
    pub simplified_sentences: usize,
    pub candidates: usize,
    pub annotated: usize,
    pub verified: usize,
    /// verified / annotated; absent when nothing was annotated.
    pub conversion_rate: Option<f64>,
    pub specificity: SpecificityHistogram,
    /// Token lengths of verified elaborations.
    pub elaboration_lengths: Option<LengthStats>,
    pub splits: Option<SplitSizes>,
    /// Contextual specificity against external per-sentence specificity scores.
    pub sentence_specificity_correlation: Option<SpecificityCorrelation>,
}

/// Tallies every pipeline stage. `sentence_specificity` maps candidate ids
/// to scores from an external sentence-specificity predictor.
pub fn dataset_stats(
    sets: &[ArticleSet],
    candidates: &[CandidateElaboration],
    aggregated: &[AggregatedLabel],
    splits: Option<&DatasetSplits<AggregatedLabel>>,
    sentence_specificity: Option<&HashMap<String, f64>>,
) -> StatsReport {
    let verified: Vec<&AggregatedLabel> = aggregated.iter().filter(|l| l.is_verified()).collect();
    let text_of: HashMap<&str, &str> = candidates
        .iter()
        .map(|c| (c.candidate_id.as_str(), c.text.as_str()))
        .collect();
    let lengths: Vec<usize> = verified
        .iter()
        .filter_map(|l| text_of.get(l.candidate_id.as_str()))
        .map(|t| tokenize(t).len())
        .collect();

    let correlation = sentence_specificity.and_then(|scores| {
        let (x, y): (Vec<f64>, Vec<f64>) = verified
            .iter()
            .filter_map(|l| {
                let score = scores.get(&l.candidate_id)?;
                Some((f64::from(l.specificity?.code()), *score))
            })
            .unzip();
        if x.len() < 2 {
            return None;
        }
        match rank_correlation(&x, &y, RankCorrelation::Kendall) {
            Ok(tau) => Some(SpecificityCorrelation { kendall_tau_b: tau, n: x.len() }),
            Err(e) => {
                log::warn!("sentence-specificity correlation undefined: {e}");
                None
            }
        }
    });

    StatsReport {
        article_sets: sets.len(),
        documents: sets.iter().map(|s| s.all_versions.len()).sum(),
        original_sentences: sets.iter().map(|s| s.original.len()).sum(),
        simplified_sentences: sets.iter().map(|s| s.simplified.len()).sum(),
        candidates: candidates.len(),
        annotated: aggregated.len(),
        verified: verified.len(),
        conversion_rate: (!aggregated.is_empty()).then(|| verified.len() as f64 / aggregated.len() as f64),
        specificity: SpecificityHistogram::from_levels(verified.iter().filter_map(|l| l.specificity)),
        elaboration_lengths: LengthStats::from_lengths(&lengths),
        splits: splits.map(|s| SplitSizes {
            train: s.train.len(),
            valid: s.valid.len(),
            test: s.test.len(),
        }),
        sentence_specificity_correlation: correlation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{SpecificityLevel, Verification};
    use crate::corpus::{Document, GradeLevel};

    fn corpus() -> Vec<ArticleSet> {
        (0..10)
            .map(|i| {
                let n = 3 + i % 3;
                let orig: Vec<String> = (0..n).map(|j| format!("Original {i} {j}.")).collect();
                let simp: Vec<String> = (0..n + 1).map(|j| format!("Simple {i} {j}.")).collect();
                let docs = vec![
                    Document::from_sentences(format!("d{i}o"), GradeLevel::Original, &orig).unwrap(),
                    Document::from_sentences(format!("d{i}a"), GradeLevel::Grade(7), &orig).unwrap(),
                    Document::from_sentences(format!("d{i}b"), GradeLevel::Grade(3), &simp).unwrap(),
                ];
                ArticleSet::new(format!("s{i}"), docs).unwrap()
            })
            .collect()
    }

    fn candidate(id: &str, text: &str) -> CandidateElaboration {
        CandidateElaboration {
            candidate_id: id.into(),
            set_id: "s0".into(),
            sentence_index: 0,
            text: text.into(),
            simplified_window: vec![],
            original_window: vec![],
        }
    }

    fn label(id: &str, level: Option<SpecificityLevel>) -> AggregatedLabel {
        AggregatedLabel {
            candidate_id: id.into(),
            verification: if level.is_some() {
                Verification::TrueElaboration
            } else {
                Verification::NotElaboration
            },
            specificity: level,
            n_annotators: 3,
            tie_broken: false,
        }
    }

    #[test]
    fn hand_tallied_counts() {
        let sets = corpus();
        // sizes n = 3,4,5,3,4,5,3,4,5,3 -> originals 39, simplified 49
        let cands = vec![
            candidate("c1", "It is a tube."),
            candidate("c2", "Blood flows."),
            candidate("c3", "That is why it hurts."),
        ];
        let labels = vec![
            label("c1", Some(SpecificityLevel::Low)),
            label("c2", None),
            label("c3", Some(SpecificityLevel::High)),
        ];
        let r = dataset_stats(&sets, &cands, &labels, None, None);
        assert_eq!((r.article_sets, r.documents), (10, 30));
        assert_eq!((r.original_sentences, r.simplified_sentences), (39, 49));
        assert_eq!((r.candidates, r.annotated, r.verified), (3, 3, 2));
        assert!((r.conversion_rate.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.specificity, SpecificityHistogram { low: 1, medium: 0, high: 1 });
        let len = r.elaboration_lengths.unwrap();
        // "it is a tube ." = 5, "that is why it hurts ." = 6
        assert_eq!((len.min, len.max, len.median), (5, 6, 5.5));
        assert!(r.sentence_specificity_correlation.is_none());
    }

    #[test]
    fn conversion_rate_one_and_kendall() {
        let cands = vec![candidate("a", "x."), candidate("b", "y."), candidate("c", "z.")];
        let labels = vec![
            label("a", Some(SpecificityLevel::Low)),
            label("b", Some(SpecificityLevel::Medium)),
            label("c", Some(SpecificityLevel::High)),
        ];
        let scores: HashMap<String, f64> = [("a", 0.9), ("b", 0.5), ("c", 0.1)]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect();
        let r = dataset_stats(&[], &cands, &labels, None, Some(&scores));
        assert_eq!(r.conversion_rate, Some(1.0));
        let c = r.sentence_specificity_correlation.unwrap();
        assert_eq!(c.n, 3);
        assert!((c.kendall_tau_b + 1.0).abs() < 1e-12);
    }
}
