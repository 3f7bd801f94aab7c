//! Accuracy, macro-F1, Spearman and MAE over specificity predictions, and
//! multi-seed evaluation reports.

use serde::{Deserialize, Serialize};

use super::context::{ContextVariant, VariantKind, ALLOWED_CONTEXT_K};
use super::encoder::TextEncoder;
use super::head::NUM_CLASSES;
use super::train::{predict_instances, train_classifier, SpecificityModel, TrainingConfig};
use super::SpecificityError;
use crate::annotation::{rank_correlation, RankCorrelation, SpecificityLevel};
use crate::instance::ElaborationInstance;

/// Rows are gold levels, columns predicted levels, both Low..High.
pub type ConfusionMatrix = [[usize; NUM_CLASSES]; NUM_CLASSES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    /// Absent when gold or predicted levels are constant.
    pub spearman: Option<f64>,
    pub mae: f64,
    pub confusion: ConfusionMatrix,
}

pub fn confusion_matrix(gold: &[SpecificityLevel], pred: &[SpecificityLevel]) -> ConfusionMatrix {
    let mut m = [[0; NUM_CLASSES]; NUM_CLASSES];
    for (g, p) in gold.iter().zip(pred) {
        m[g.index()][p.index()] += 1;
    }
    m
}

/// Mean per-class F1 over all three classes; a class with no gold and no
/// predicted instances contributes 0.
pub fn macro_f1(confusion: &ConfusionMatrix) -> f64 {
    let mut total = 0.0;
    for (c, row) in confusion.iter().enumerate() {
        let tp = row[c] as f64;
        let predicted: usize = confusion.iter().map(|r| r[c]).sum();
        let actual: usize = row.iter().sum();
        let denom = predicted as f64 + actual as f64;
        if denom > 0.0 {
            total += 2.0 * tp / denom;
        }
    }
    total / NUM_CLASSES as f64
}

pub fn compute_metrics(
    gold: &[SpecificityLevel],
    pred: &[SpecificityLevel],
    seed: u64,
) -> Result<RunMetrics, SpecificityError> {
    if gold.is_empty() {
        return Err(SpecificityError::EmptyEvaluationSet);
    }
    if gold.len() != pred.len() {
        return Err(SpecificityError::InvalidConfig(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let n = gold.len() as f64;
    let confusion = confusion_matrix(gold, pred);
    let correct: usize = (0..NUM_CLASSES).map(|c| confusion[c][c]).sum();
    let mae = gold
        .iter()
        .zip(pred)
        .map(|(g, p)| (f64::from(g.code()) - f64::from(p.code())).abs())
        .sum::<f64>()
        / n;
    let codes = |v: &[SpecificityLevel]| v.iter().map(|l| f64::from(l.code())).collect::<Vec<_>>();
    let spearman = if gold.len() >= 2 {
        rank_correlation(&codes(gold), &codes(pred), RankCorrelation::Spearman).ok()
    } else {
        None
    };
    Ok(RunMetrics {
        seed,
        accuracy: correct as f64 / n,
        macro_f1: macro_f1(&confusion),
        spearman,
        mae,
        confusion,
    })
}

/// Scores a trained model on labelled instances.
pub fn evaluate_model(
    model: &SpecificityModel,
    encoder: &dyn TextEncoder,
    test: &[ElaborationInstance],
) -> Result<RunMetrics, SpecificityError> {
    if test.is_empty() {
        return Err(SpecificityError::EmptyEvaluationSet);
    }
    let gold = test
        .iter()
        .map(|i| i.specificity.ok_or_else(|| SpecificityError::MissingLabel(i.instance_id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let pred: Vec<SpecificityLevel> = predict_instances(model, encoder, test)?
        .into_iter()
        .map(|p| p.level)
        .collect();
    compute_metrics(&gold, &pred, model.training.seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub variant: ContextVariant,
    pub n_runs: usize,
    pub seeds: Vec<u64>,
    pub accuracy: MeanStd,
    pub macro_f1: MeanStd,
    /// Over the runs where Spearman was defined.
    pub spearman: Option<MeanStd>,
    pub mae: MeanStd,
    /// Summed over runs.
    pub confusion: ConfusionMatrix,
    pub runs: Vec<RunMetrics>,
}

impl ClassifierReport {
    pub fn from_runs(variant: ContextVariant, runs: Vec<RunMetrics>) -> Result<Self, SpecificityError> {
        let collect = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<_>>();
        let accuracy = MeanStd::from_values(&collect(|r| r.accuracy)).ok_or(SpecificityError::NoRuns)?;
        let macro_f1 = MeanStd::from_values(&collect(|r| r.macro_f1)).ok_or(SpecificityError::NoRuns)?;
        let mae = MeanStd::from_values(&collect(|r| r.mae)).ok_or(SpecificityError::NoRuns)?;
        let spearman_values: Vec<f64> = runs.iter().filter_map(|r| r.spearman).collect();
        let mut confusion = [[0; NUM_CLASSES]; NUM_CLASSES];
        for r in &runs {
            for (row, add) in confusion.iter_mut().zip(&r.confusion) {
                for (c, a) in row.iter_mut().zip(add) {
                    *c += a;
                }
            }
        }
        Ok(Self {
            variant,
            n_runs: runs.len(),
            seeds: runs.iter().map(|r| r.seed).collect(),
            accuracy,
            macro_f1,
            spearman: MeanStd::from_values(&spearman_values),
            mae,
            confusion,
            runs,
        })
    }
}

/// Trains one freshly initialized head per seed and evaluates each on `test`.
pub fn evaluate_classifier(
    train: &[ElaborationInstance],
    valid: &[ElaborationInstance],
    test: &[ElaborationInstance],
    variant: ContextVariant,
    config: &TrainingConfig,
    encoder: &dyn TextEncoder,
    seeds: &[u64],
) -> Result<ClassifierReport, SpecificityError> {
    if test.is_empty() {
        return Err(SpecificityError::EmptyEvaluationSet);
    }
    if seeds.is_empty() {
        return Err(SpecificityError::NoRuns);
    }
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let cfg = TrainingConfig { seed, ..config.clone() };
        let model = train_classifier(train, valid, variant, &cfg, encoder)?;
        runs.push(evaluate_model(&model, encoder, test)?);
    }
    ClassifierReport::from_runs(variant, runs)
}

/// One report per preceding-context length k in {2, 4, 6}.
pub fn context_length_ablation(
    train: &[ElaborationInstance],
    valid: &[ElaborationInstance],
    test: &[ElaborationInstance],
    kind: VariantKind,
    config: &TrainingConfig,
    encoder: &dyn TextEncoder,
    seeds: &[u64],
) -> Result<Vec<ClassifierReport>, SpecificityError> {
    ALLOWED_CONTEXT_K
        .iter()
        .map(|&k| {
            let variant = ContextVariant::new(kind, k)?;
            evaluate_classifier(train, valid, test, variant, config, encoder, seeds)
        })
        .collect()
}
