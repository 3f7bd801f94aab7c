//! Human annotation ingestion, mode aggregation, agreement statistics and
//! dataset splits.

pub mod agreement;
mod splits;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agreement::{
    cohen_kappa, cohen_kappa_from_table, fleiss_kappa, krippendorff_alpha, rank_correlation,
    AlphaMetric, RankCorrelation,
};
pub use splits::{make_splits, DatasetSplits, SplitManifest, SpecificityHistogram};

#[derive(Debug, Error, PartialEq)]
pub enum AnnotationError {
    #[error("raw specificity {0} is outside 1..=5")]
    SpecificityOutOfRange(i64),
    #[error("cannot aggregate an empty record list")]
    NoRecords,
    #[error("records mix candidates {0} and {1}")]
    MixedCandidates(String, String),
    #[error("record for {candidate_id} by {annotator_id}: raw_specificity must be present iff verification is true_elaboration")]
    SpecificityMismatch {
        candidate_id: String,
        annotator_id: String,
    },
    #[error("label lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {0} items")]
    TooFewItems(usize),
    #[error("rows must all sum to the same rater count n >= 2 (row {row} sums to {sum}, expected {expected})")]
    UnequalRows { row: usize, sum: u64, expected: u64 },
    #[error("no unit has two or more pairable values")]
    NoPairableValues,
    #[error("input is constant; rank correlation is undefined")]
    ConstantInput,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("candidate {0} is in both the expert and validation id sets")]
    SplitOverlap(String),
    #[error("split id {0} is not a verified elaboration")]
    UnknownSplitId(String),
    #[error("unknown specificity level {0:?}")]
    UnknownLevel(String),
}

/// Contextual specificity on the collapsed three-point scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecificityLevel {
    Low = 1,
    Medium = 2,
    High = 3,
}

impl SpecificityLevel {
    pub const ALL: [SpecificityLevel; 3] = [Self::Low, Self::Medium, Self::High];

    /// Ordinal code 1, 2 or 3.
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Position 0, 1 or 2, for indexing per-class arrays.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Low => "low",
            Self::Medium => "medium",
            Self::High => "high",
        }
    }
}

impl fmt::Display for SpecificityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpecificityLevel {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" | "1" => Ok(Self::Low),
            "medium" | "2" => Ok(Self::Medium),
            "high" | "3" => Ok(Self::High),
            _ => Err(AnnotationError::UnknownLevel(s.to_owned())),
        }
    }
}

/// Maps the five-point crowd scale onto three levels: {1,2} low, 3 medium, {4,5} high.
pub fn collapse_specificity(raw: i64) -> Result<SpecificityLevel, AnnotationError> {
    match raw {
        1 | 2 => Ok(SpecificityLevel::Low),
        3 => Ok(SpecificityLevel::Medium),
        4 | 5 => Ok(SpecificityLevel::High),
        _ => Err(AnnotationError::SpecificityOutOfRange(raw)),
    }
}

/// Name of the five-to-three collapse, echoed in output metadata.
pub const COLLAPSE_MAPPING: &str = "1,2->low; 3->medium; 4,5->high";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    TrueElaboration,
    NotElaboration,
    Unrelated,
}

impl Verification {
    pub const ALL: [Verification; 3] = [
        Self::TrueElaboration,
        Self::NotElaboration,
        Self::Unrelated,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationSource {
    Expert,
    Trusted,
    Crowd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub candidate_id: String,
    pub annotator_id: String,
    pub source: AnnotationSource,
    pub verification: Verification,
    pub raw_specificity: Option<i64>,
    #[serde(default)]
    pub rationale: String,
}

impl AnnotationRecord {
    pub fn validate(&self) -> Result<(), AnnotationError> {
        let is_true = self.verification == Verification::TrueElaboration;
        if is_true != self.raw_specificity.is_some() {
            return Err(AnnotationError::SpecificityMismatch {
                candidate_id: self.candidate_id.clone(),
                annotator_id: self.annotator_id.clone(),
            });
        }
        if let Some(raw) = self.raw_specificity {
            collapse_specificity(raw)?;
        }
        Ok(())
    }

    /// Records marked unrelated stay in the raw store but do not enter agreement statistics.
    pub fn is_unverifiable(&self) -> bool {
        self.verification == Verification::Unrelated
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatedLabel {
    pub candidate_id: String,
    pub verification: Verification,
    pub specificity: Option<SpecificityLevel>,
    pub n_annotators: usize,
    pub tie_broken: bool,
}

impl AggregatedLabel {
    pub fn is_verified(&self) -> bool {
        self.verification == Verification::TrueElaboration
    }
}

/// Aggregates one candidate's records by taking the mode.
///
/// Verification: an exact tie that involves `true_elaboration` rejects the
/// candidate (`not_elaboration` if it is among the tied labels, otherwise
/// `unrelated`); a tie between the two rejection labels resolves to
/// `not_elaboration`.
///
/// Specificity (verified candidates only): the mode of the collapsed levels.
/// When several levels tie for the mode, the one closest to the arithmetic
/// mean of all votes wins, and a residual tie goes to the lower level.
pub fn aggregate(records: &[AnnotationRecord]) -> Result<AggregatedLabel, AnnotationError> {
    let first = records.first().ok_or(AnnotationError::NoRecords)?;
    for r in records {
        if r.candidate_id != first.candidate_id {
            return Err(AnnotationError::MixedCandidates(
                first.candidate_id.clone(),
                r.candidate_id.clone(),
            ));
        }
        r.validate()?;
    }

    let mut votes: BTreeMap<Verification, usize> = BTreeMap::new();
    for r in records {
        *votes.entry(r.verification).or_default() += 1;
    }
    let top = votes.values().copied().max().unwrap_or(0);
    let tied: Vec<Verification> = Verification::ALL
        .into_iter()
        .filter(|v| votes.get(v) == Some(&top))
        .collect();
    let mut tie_broken = tied.len() > 1;
    let verification = match tied.as_slice() {
        [only] => *only,
        _ if tied.contains(&Verification::NotElaboration) => Verification::NotElaboration,
        _ => Verification::Unrelated,
    };

    let specificity = if verification == Verification::TrueElaboration {
        let levels: Vec<SpecificityLevel> = records
            .iter()
            .filter_map(|r| r.raw_specificity)
            .map(collapse_specificity)
            .collect::<Result<_, _>>()?;
        let (level, tied) = specificity_mode(&levels);
        tie_broken |= tied;
        level
    } else {
        None
    };

    Ok(AggregatedLabel {
        candidate_id: first.candidate_id.clone(),
        verification,
        specificity,
        n_annotators: records.len(),
        tie_broken,
    })
}

/// Mode of the given levels with the mean-distance tie rule; the flag reports
/// whether a tie had to be broken.
pub fn specificity_mode(levels: &[SpecificityLevel]) -> (Option<SpecificityLevel>, bool) {
    if levels.is_empty() {
        return (None, false);
    }
    let mut counts = [0usize; 3];
    for l in levels {
        counts[l.index()] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&0);
    let tied: Vec<SpecificityLevel> = SpecificityLevel::ALL
        .into_iter()
        .filter(|l| counts[l.index()] == top)
        .collect();
    if let [only] = tied.as_slice() {
        return (Some(*only), false);
    }
    let sum: usize = levels.iter().map(|l| usize::from(l.code())).sum();
    // compare |code - sum/n| as |code*n - sum| to stay in integers
    let n = levels.len();
    let best = tied
        .into_iter()
        .min_by_key(|l| (usize::from(l.code()) * n).abs_diff(sum))
        .expect("tied set is non-empty");
    (Some(best), true)
}

/// Groups records by candidate (sorted by id) and aggregates each group.
pub fn aggregate_all(records: &[AnnotationRecord]) -> Result<Vec<AggregatedLabel>, AnnotationError> {
    let mut groups: BTreeMap<&str, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry(r.candidate_id.as_str())
            .or_default()
            .push(r.clone());
    }
    groups.values().map(|g| aggregate(g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Verification::*;

    fn rec(v: Verification, raw: Option<i64>) -> AnnotationRecord {
        AnnotationRecord {
            candidate_id: "c".into(),
            annotator_id: "a".into(),
            source: AnnotationSource::Crowd,
            verification: v,
            raw_specificity: raw,
            rationale: String::new(),
        }
    }

    #[test]
    fn collapse_examples() {
        use SpecificityLevel::*;
        let got: Vec<_> = (1..=5).map(|r| collapse_specificity(r).unwrap()).collect();
        assert_eq!(got, vec![Low, Low, Medium, High, High]);
        for w in got.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert!(collapse_specificity(0).is_err());
        assert!(collapse_specificity(6).is_err());
    }

    #[test]
    fn strict_majority_verifies() {
        let l = aggregate(&[
            rec(TrueElaboration, Some(4)),
            rec(TrueElaboration, Some(5)),
            rec(NotElaboration, None),
        ])
        .unwrap();
        assert_eq!(l.verification, TrueElaboration);
        assert_eq!(l.specificity, Some(SpecificityLevel::High));
        assert!(!l.tie_broken);
        assert_eq!(l.n_annotators, 3);
    }

    #[test]
    fn tie_with_true_rejects() {
        let l = aggregate(&[rec(TrueElaboration, Some(3)), rec(NotElaboration, None)]).unwrap();
        assert_eq!(l.verification, NotElaboration);
        assert_eq!(l.specificity, None);
        assert!(l.tie_broken);

        let l = aggregate(&[rec(TrueElaboration, Some(3)), rec(Unrelated, None)]).unwrap();
        assert_eq!(l.verification, Unrelated);
        assert!(l.tie_broken);

        let l = aggregate(&[rec(Unrelated, None), rec(NotElaboration, None)]).unwrap();
        assert_eq!(l.verification, NotElaboration);
        assert!(l.tie_broken);
    }

    #[test]
    fn specificity_tie_rules() {
        use SpecificityLevel::*;
        // {Low, High}: mean 2, Medium unvoted, Low and High equidistant -> Low
        assert_eq!(specificity_mode(&[Low, High]), (Some(Low), true));
        assert_eq!(specificity_mode(&[High, Low]), (Some(Low), true));
        assert_eq!(specificity_mode(&[Low, Medium]), (Some(Low), true));
        assert_eq!(specificity_mode(&[Medium, High]), (Some(Medium), true));
        assert_eq!(specificity_mode(&[Medium, Medium]), (Some(Medium), false));
        // {L,L,M,M,H}: mean 1.8, tied modes L and M, M is nearer
        assert_eq!(specificity_mode(&[Low, Low, Medium, Medium, High]), (Some(Medium), true));
        // {L,L,H,H,M}: mean 2, L and H equidistant -> Low
        assert_eq!(specificity_mode(&[Low, Low, High, High, Medium]), (Some(Low), true));
        assert_eq!(specificity_mode(&[]), (None, false));
    }

    #[test]
    fn aggregate_errors() {
        assert_eq!(aggregate(&[]), Err(AnnotationError::NoRecords));
        let mut other = rec(NotElaboration, None);
        other.candidate_id = "d".into();
        assert!(matches!(
            aggregate(&[rec(NotElaboration, None), other]),
            Err(AnnotationError::MixedCandidates(..))
        ));
        assert!(matches!(
            aggregate(&[rec(TrueElaboration, None)]),
            Err(AnnotationError::SpecificityMismatch { .. })
        ));
        assert!(matches!(
            aggregate(&[rec(NotElaboration, Some(2))]),
            Err(AnnotationError::SpecificityMismatch { .. })
        ));
    }

    #[test]
    fn record_json_shape() {
        let line = r#"{"candidate_id":"s:3","annotator_id":"w1","source":"crowd","verification":"true_elaboration","raw_specificity":2,"rationale":"defines a term"}"#;
        let r: AnnotationRecord = serde_json::from_str(line).unwrap();
        assert_eq!(r.verification, TrueElaboration);
        assert_eq!(serde_json::to_string(&r).unwrap(), line);
        let bad = r#"{"candidate_id":"s","annotator_id":"w","source":"crowd","verification":"maybe","raw_specificity":null,"rationale":""}"#;
        assert!(serde_json::from_str::<AnnotationRecord>(bad).is_err());
    }

    #[test]
    fn aggregate_all_groups_by_candidate() {
        let mut a = rec(TrueElaboration, Some(1));
        a.candidate_id = "b".into();
        let mut b = rec(NotElaboration, None);
        b.candidate_id = "a".into();
        let labels = aggregate_all(&[a.clone(), b, a]).unwrap();
        assert_eq!(labels.len(), 2);
        assert_eq!(labels[0].candidate_id, "a");
        assert_eq!(labels[1].specificity, Some(SpecificityLevel::Low));
        assert_eq!(labels[1].n_annotators, 2);
    }
}
