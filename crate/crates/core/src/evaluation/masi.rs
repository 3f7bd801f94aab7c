use std::collections::{BTreeMap, BTreeSet};

use super::{EvaluationError, HumanEvalRecord};

/// |a ∩ b| / |a ∪ b|, with two empty sets counted as identical.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// 1 - J·M where M is 1 for equal sets, 2/3 when one contains the other,
/// 1/3 for other overlapping sets and 0 for disjoint ones.
pub fn masi_distance<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let monotonicity = if a == b {
        1.0
    } else if a.is_subset(b) || b.is_subset(a) {
        2.0 / 3.0
    } else if a.intersection(b).next().is_some() {
        1.0 / 3.0
    } else {
        0.0
    };
    1.0 - jaccard(a, b) * monotonicity
}

/// `1 - D_o / D_e` for two evaluators' paired selections, with MASI as
/// the disagreement and the expected disagreement taken over the product
/// of each evaluator's empirical distribution of selection sets.
pub fn kappa_masi_pairs<T: Ord + Clone>(a: &[BTreeSet<T>], b: &[BTreeSet<T>]) -> Result<f64, EvaluationError> {
    if a.len() != b.len() {
        return Err(EvaluationError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvaluationError::EmptyCorpus);
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).map(|(x, y)| masi_distance(x, y)).sum::<f64>() / n;
    let marginal = |sets: &[BTreeSet<T>]| {
        let mut m: BTreeMap<BTreeSet<T>, f64> = BTreeMap::new();
        for s in sets {
            *m.entry(s.clone()).or_insert(0.0) += 1.0 / n;
        }
        m
    };
    let (pa, pb) = (marginal(a), marginal(b));
    let mut expected = 0.0;
    for (s, ps) in &pa {
        for (t, pt) in &pb {
            expected += ps * pt * masi_distance(s, t);
        }
    }
    if expected == 0.0 {
        // both evaluators always gave one and the same set
        return Ok(1.0);
    }
    Ok(1.0 - observed / expected)
}

/// Groups records by instance; exactly two evaluators must rate every instance.
pub fn kappa_masi(records: &[HumanEvalRecord]) -> Result<f64, EvaluationError> {
    let evaluators: BTreeSet<&str> = records.iter().map(|r| r.evaluator_id.as_str()).collect();
    if evaluators.len() != 2 {
        return Err(EvaluationError::EvaluatorCount(evaluators.len()));
    }
    let mut by_instance: BTreeMap<&str, BTreeMap<&str, &BTreeSet<String>>> = BTreeMap::new();
    for r in records {
        let slot = by_instance.entry(&r.instance_id).or_default();
        if slot.insert(&r.evaluator_id, &r.selected_systems).is_some() {
            return Err(EvaluationError::DuplicateRating {
                instance_id: r.instance_id.clone(),
                evaluator_id: r.evaluator_id.clone(),
            });
        }
    }
    let (first, second) = {
        let mut it = evaluators.iter();
        (*it.next().expect("two"), *it.next().expect("two"))
    };
    let mut a = Vec::with_capacity(by_instance.len());
    let mut b = Vec::with_capacity(by_instance.len());
    for (instance, ratings) in &by_instance {
        for ev in [first, second] {
            if !ratings.contains_key(ev) {
                return Err(EvaluationError::MissingRating {
                    instance_id: (*instance).to_owned(),
                    evaluator_id: ev.to_owned(),
                });
            }
        }
        a.push(ratings[first].clone());
        b.push(ratings[second].clone());
    }
    kappa_masi_pairs(&a, &b)
}
