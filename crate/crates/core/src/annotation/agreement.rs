//! Inter-annotator agreement and rank correlation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnnotationError;

/// Cohen's kappa for two annotators labelling the same items.
///
/// Chance agreement is the product of the two annotators' marginals. When
/// chance agreement is 1 (both used one identical label throughout) the
/// observed agreement is also 1 and the result is defined as 1.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, AnnotationError> {
    if a.len() != b.len() {
        return Err(AnnotationError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AnnotationError::TooFewItems(1));
    }
    let labels: BTreeSet<&T> = a.iter().chain(b).collect();
    let index: BTreeMap<&T, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut table = vec![vec![0u64; labels.len()]; labels.len()];
    for (x, y) in a.iter().zip(b) {
        table[index[x]][index[y]] += 1;
    }
    cohen_kappa_from_table(&table)
}

/// Cohen's kappa from a square contingency table (rows: annotator A, columns: B).
pub fn cohen_kappa_from_table(table: &[Vec<u64>]) -> Result<f64, AnnotationError> {
    let k = table.len();
    if let Some(row) = table.iter().find(|r| r.len() != k) {
        return Err(AnnotationError::LengthMismatch(row.len(), k));
    }
    let n: u64 = table.iter().flatten().sum();
    if n == 0 {
        return Err(AnnotationError::TooFewItems(1));
    }
    let n = n as f64;
    let observed = (0..k).map(|i| table[i][i]).sum::<u64>() as f64 / n;
    let expected: f64 = (0..k)
        .map(|i| {
            let row: u64 = table[i].iter().sum();
            let col: u64 = table.iter().map(|r| r[i]).sum();
            (row as f64 / n) * (col as f64 / n)
        })
        .sum();
    if expected >= 1.0 {
        return Ok(1.0);
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Fleiss' kappa over an item × category count matrix where every row sums
/// to the same number of raters n ≥ 2.
pub fn fleiss_kappa(counts: &[Vec<u64>]) -> Result<f64, AnnotationError> {
    let first = counts.first().ok_or(AnnotationError::TooFewItems(1))?;
    let categories = first.len();
    let n: u64 = first.iter().sum();
    for (row, r) in counts.iter().enumerate() {
        let sum: u64 = r.iter().sum();
        if r.len() != categories || sum != n || n < 2 {
            return Err(AnnotationError::UnequalRows {
                row,
                sum,
                expected: n,
            });
        }
    }
    let items = counts.len() as f64;
    let nf = n as f64;
    let p_bar = counts
        .iter()
        .map(|r| {
            let sq: u64 = r.iter().map(|c| c * c).sum();
            (sq as f64 - nf) / (nf * (nf - 1.0))
        })
        .sum::<f64>()
        / items;
    let pe_bar: f64 = (0..categories)
        .map(|j| {
            let pj = counts.iter().map(|r| r[j]).sum::<u64>() as f64 / (items * nf);
            pj * pj
        })
        .sum();
    if pe_bar >= 1.0 {
        return Ok(1.0);
    }
    Ok((p_bar - pe_bar) / (1.0 - pe_bar))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMetric {
    Nominal,
    Ordinal,
}

/// Krippendorff's alpha over units (rows) × annotators (columns); `None`
/// marks a missing label. Units with fewer than two values are not pairable
/// and are skipped.
///
/// Ordinal distance between ranks c and k is
/// `(sum of n_g for g between c and k inclusive - (n_c + n_k) / 2)^2`,
/// where n_g are the value totals of the coincidence matrix.
pub fn krippendorff_alpha<T: Ord>(
    units: &[Vec<Option<T>>],
    metric: AlphaMetric,
) -> Result<f64, AnnotationError> {
    let values: BTreeSet<&T> = units.iter().flatten().flatten().collect();
    let index: BTreeMap<&T, usize> = values.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let v = values.len();

    let mut coincidence = vec![vec![0.0f64; v]; v];
    for unit in units {
        let present: Vec<usize> = unit.iter().flatten().map(|x| index[x]).collect();
        let m = present.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m - 1) as f64;
        for (i, &c) in present.iter().enumerate() {
            for (j, &k) in present.iter().enumerate() {
                if i != j {
                    coincidence[c][k] += w;
                }
            }
        }
    }
    let marginals: Vec<f64> = coincidence.iter().map(|r| r.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    if n == 0.0 {
        return Err(AnnotationError::NoPairableValues);
    }

    let delta = distance_table(&marginals, metric);
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..v {
        for k in 0..v {
            observed += coincidence[c][k] * delta[c][k];
            expected += marginals[c] * marginals[k] * delta[c][k];
        }
    }
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

fn distance_table(marginals: &[f64], metric: AlphaMetric) -> Vec<Vec<f64>> {
    let v = marginals.len();
    let mut delta = vec![vec![0.0; v]; v];
    for c in 0..v {
        for k in 0..v {
            delta[c][k] = match metric {
                AlphaMetric::Nominal => f64::from(u8::from(c != k)),
                AlphaMetric::Ordinal if c == k => 0.0,
                AlphaMetric::Ordinal => {
                    let (lo, hi) = (c.min(k), c.max(k));
                    let between: f64 = marginals[lo..=hi].iter().sum();
                    let d = between - (marginals[c] + marginals[k]) / 2.0;
                    d * d
                }
            };
        }
    }
    delta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankCorrelation {
    Spearman,
    /// Kendall's tau-b, corrected for ties on either side.
    Kendall,
}

pub fn rank_correlation(x: &[f64], y: &[f64], kind: RankCorrelation) -> Result<f64, AnnotationError> {
    if x.len() != y.len() {
        return Err(AnnotationError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(AnnotationError::TooFewItems(2));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnnotationError::NonFinite);
    }
    match kind {
        RankCorrelation::Spearman => pearson(&average_ranks(x), &average_ranks(y)),
        RankCorrelation::Kendall => kendall_tau_b(x, y),
    }
}

/// 1-based ranks, ties sharing the mean of the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnnotationError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnnotationError::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, AnnotationError> {
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            if dx == 0 {
                ties_x += 1;
            }
            if dy == 0 {
                ties_y += 1;
            }
            match dx * dy {
                p if p > 0 => concordant += 1,
                p if p < 0 => discordant += 1,
                _ => {}
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = ((pairs - ties_x) as f64 * (pairs - ties_y) as f64).sqrt();
    if denom == 0.0 {
        return Err(AnnotationError::ConstantInput);
    }
    Ok((concordant - discordant) as f64 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cohen_examples() {
        assert_eq!(cohen_kappa(&["x", "y", "x", "z"], &["x", "y", "x", "z"]).unwrap(), 1.0);
        // p_o = 0.5; marginals 1/2,1/2 on both sides -> p_e = 0.5
        assert_eq!(cohen_kappa(&["x", "x", "y", "y"], &["x", "y", "x", "y"]).unwrap(), 0.0);
        // p_o = 35/50 = .7; rows .5/.5, cols .6/.4 -> p_e = .5 -> kappa = .4
        let k = cohen_kappa_from_table(&[vec![20, 5], vec![10, 15]]).unwrap();
        assert!((k - 0.4).abs() < 1e-9);
        assert_eq!(cohen_kappa(&[1, 1], &[1, 1]).unwrap(), 1.0);
        assert!(matches!(
            cohen_kappa(&[1, 2], &[1]),
            Err(AnnotationError::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn fleiss_examples() {
        assert_eq!(fleiss_kappa(&[vec![2, 0], vec![0, 2]]).unwrap(), 1.0);
        // P_i = 1, 1/3, 1/3 -> P̄ = 5/9; p = (2/3, 1/3) -> P̄e = 5/9 -> kappa 0
        let k = fleiss_kappa(&[vec![3, 0], vec![2, 1], vec![1, 2]]).unwrap();
        assert!(k.abs() < 1e-12);
        assert!(matches!(
            fleiss_kappa(&[vec![2, 0], vec![1, 2]]),
            Err(AnnotationError::UnequalRows { row: 1, .. })
        ));
    }

    #[test]
    fn alpha_perfect_agreement() {
        let units = vec![
            vec![Some(1), Some(1), None],
            vec![Some(2), Some(2), Some(2)],
            vec![Some(3), None, Some(3)],
        ];
        assert_eq!(krippendorff_alpha(&units, AlphaMetric::Nominal).unwrap(), 1.0);
        assert_eq!(krippendorff_alpha(&units, AlphaMetric::Ordinal).unwrap(), 1.0);
        let lonely: Vec<Vec<Option<u8>>> = vec![vec![Some(1), None], vec![None, Some(2)]];
        assert_eq!(
            krippendorff_alpha(&lonely, AlphaMetric::Nominal),
            Err(AnnotationError::NoPairableValues)
        );
    }

    #[test]
    fn rank_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let rev = [4.0, 3.0, 2.0, 1.0];
        for kind in [RankCorrelation::Spearman, RankCorrelation::Kendall] {
            assert!((rank_correlation(&x, &x, kind).unwrap() - 1.0).abs() < 1e-12);
            assert!((rank_correlation(&x, &rev, kind).unwrap() + 1.0).abs() < 1e-12);
        }
        // one discordant pair (2,3) of six
        let t = rank_correlation(&x, &[1.0, 3.0, 2.0, 4.0], RankCorrelation::Kendall).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(
            rank_correlation(&x, &[1.0; 4], RankCorrelation::Spearman),
            Err(AnnotationError::ConstantInput)
        );
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    proptest! {
        #[test]
        fn kappas_are_bounded(pairs in proptest::collection::vec((0u8..3, 0u8..3), 1..40)) {
            let (a, b): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            let k = cohen_kappa(&a, &b).unwrap();
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&k));
            let distinct: BTreeSet<_> = a.iter().collect();
            if distinct.len() >= 2 {
                prop_assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
            }
        }

        #[test]
        fn alpha_is_bounded_above(units in proptest::collection::vec(
            proptest::collection::vec(proptest::option::of(1u8..4), 2..5), 2..7)
        ) {
            for metric in [AlphaMetric::Nominal, AlphaMetric::Ordinal] {
                if let Ok(a) = krippendorff_alpha(&units, metric) {
                    prop_assert!(a <= 1.0 + 1e-12);
                }
            }
        }
    }
}
