use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AggregatedLabel, AnnotationError, SpecificityLevel, COLLAPSE_MAPPING};

/// Train, validation and test partitions of the verified elaborations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplits<T> {
    pub train: Vec<T>,
    pub valid: Vec<T>,
    pub test: Vec<T>,
}

impl<T> Default for DatasetSplits<T> {
    fn default() -> Self {
        Self {
            train: Vec::new(),
            valid: Vec::new(),
            test: Vec::new(),
        }
    }
}

impl<T> DatasetSplits<T> {
    pub fn try_map<U, E>(self, mut f: impl FnMut(T) -> Result<U, E>) -> Result<DatasetSplits<U>, E> {
        Ok(DatasetSplits {
            train: self.train.into_iter().map(&mut f).collect::<Result<_, _>>()?,
            valid: self.valid.into_iter().map(&mut f).collect::<Result<_, _>>()?,
            test: self.test.into_iter().map(&mut f).collect::<Result<_, _>>()?,
        })
    }

    pub fn named(&self) -> [(&'static str, &[T]); 3] {
        [("train", &self.train), ("valid", &self.valid), ("test", &self.test)]
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpecificityHistogram {
    pub low: usize,
    pub medium: usize,
    pub high: usize,
}

impl SpecificityHistogram {
    pub fn add(&mut self, level: SpecificityLevel) {
        match level {
            SpecificityLevel::Low => self.low += 1,
            SpecificityLevel::Medium => self.medium += 1,
            SpecificityLevel::High => self.high += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.low + self.medium + self.high
    }

    pub fn from_levels(levels: impl IntoIterator<Item = SpecificityLevel>) -> Self {
        let mut h = Self::default();
        for l in levels {
            h.add(l);
        }
        h
    }
}

/// Partitions verified labels: expert ids form the test split, `valid_ids`
/// the validation split, the rest is training data. Unverified labels are
/// dropped.
pub fn make_splits(
    labels: &[AggregatedLabel],
    expert_ids: &BTreeSet<String>,
    valid_ids: &BTreeSet<String>,
) -> Result<DatasetSplits<AggregatedLabel>, AnnotationError> {
    if let Some(id) = expert_ids.intersection(valid_ids).next() {
        return Err(AnnotationError::SplitOverlap(id.clone()));
    }
    let verified: Vec<&AggregatedLabel> = labels.iter().filter(|l| l.is_verified()).collect();
    let known: BTreeSet<&str> = verified.iter().map(|l| l.candidate_id.as_str()).collect();
    if let Some(id) = expert_ids
        .iter()
        .chain(valid_ids)
        .find(|id| !known.contains(id.as_str()))
    {
        return Err(AnnotationError::UnknownSplitId(id.clone()));
    }
    let mut splits = DatasetSplits::default();
    for label in verified {
        let target = if expert_ids.contains(&label.candidate_id) {
            &mut splits.test
        } else if valid_ids.contains(&label.candidate_id) {
            &mut splits.valid
        } else {
            &mut splits.train
        };
        target.push(label.clone());
    }
    Ok(splits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitHistograms {
    pub train: SpecificityHistogram,
    pub valid: SpecificityHistogram,
    pub test: SpecificityHistogram,
}

/// Candidate ids per split plus their specificity histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
    pub histograms: SplitHistograms,
    pub collapse_mapping: String,
}

impl SplitManifest {
    pub fn from_splits(splits: &DatasetSplits<AggregatedLabel>) -> Self {
        let ids = |v: &[AggregatedLabel]| v.iter().map(|l| l.candidate_id.clone()).collect();
        let hist = |v: &[AggregatedLabel]| SpecificityHistogram::from_levels(v.iter().filter_map(|l| l.specificity));
        Self {
            train: ids(&splits.train),
            valid: ids(&splits.valid),
            test: ids(&splits.test),
            histograms: SplitHistograms {
                train: hist(&splits.train),
                valid: hist(&splits.valid),
                test: hist(&splits.test),
            },
            collapse_mapping: COLLAPSE_MAPPING.to_owned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Verification;

    fn label(id: usize, verified: bool) -> AggregatedLabel {
        AggregatedLabel {
            candidate_id: format!("c{id}"),
            verification: if verified {
                Verification::TrueElaboration
            } else {
                Verification::NotElaboration
            },
            specificity: verified.then(|| SpecificityLevel::ALL[id % 3]),
            n_annotators: 5,
            tie_broken: false,
        }
    }

    fn ids(v: &[usize]) -> BTreeSet<String> {
        v.iter().map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn ten_labels_three_expert_two_valid() {
        let labels: Vec<_> = (0..10).map(|i| label(i, true)).collect();
        let s = make_splits(&labels, &ids(&[1, 4, 7]), &ids(&[0, 9])).unwrap();
        let got = |v: &[AggregatedLabel]| v.iter().map(|l| l.candidate_id.clone()).collect::<BTreeSet<_>>();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (5, 2, 3));
        assert_eq!(got(&s.test), ids(&[1, 4, 7]));
        assert_eq!(got(&s.valid), ids(&[0, 9]));
        assert_eq!(got(&s.train), ids(&[2, 3, 5, 6, 8]));
        let m = SplitManifest::from_splits(&s);
        // c1, c4, c7 -> index 1 -> medium
        assert_eq!(m.histograms.test, SpecificityHistogram { low: 0, medium: 3, high: 0 });
        assert_eq!(m.histograms.train.total(), 5);
    }

    #[test]
    fn empty_expert_set_gives_empty_test() {
        let labels: Vec<_> = (0..4).map(|i| label(i, true)).collect();
        let s = make_splits(&labels, &BTreeSet::new(), &ids(&[2])).unwrap();
        assert!(s.test.is_empty());
        assert_eq!(s.train.len(), 3);
    }

    #[test]
    fn unverified_are_dropped_and_errors_reported() {
        let labels = vec![label(0, true), label(1, false), label(2, true)];
        let s = make_splits(&labels, &ids(&[2]), &BTreeSet::new()).unwrap();
        assert_eq!(s.len(), 2);
        assert!(matches!(
            make_splits(&labels, &ids(&[0]), &ids(&[0])),
            Err(AnnotationError::SplitOverlap(_))
        ));
        assert!(matches!(
            make_splits(&labels, &ids(&[1]), &BTreeSet::new()),
            Err(AnnotationError::UnknownSplitId(_))
        ));
    }
}
