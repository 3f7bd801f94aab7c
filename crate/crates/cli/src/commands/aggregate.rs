use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use elabsimp_core::annotation::{
    aggregate_all, collapse_specificity, krippendorff_alpha, AlphaMetric, AnnotationRecord, SpecificityHistogram,
    Verification,
};
use elabsimp_core::jsonl::{read_jsonl, write_jsonl};
use serde::Serialize;

use super::{prepare_file, require, sibling};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::runlog::write_json_pretty;

/// Agreement and outcome summary written next to the aggregated labels.
#[derive(Debug, Serialize)]
struct AggregationReport {
    records: usize,
    candidates: usize,
    annotators: usize,
    verified: usize,
    verification_ties_broken: usize,
    specificity_ties_broken: usize,
    specificity: SpecificityHistogram,
    /// Nominal alpha over verification labels, excluding `unrelated` votes.
    verification_alpha: Option<f64>,
    /// Ordinal alpha over collapsed specificity of `true_elaboration` votes.
    specificity_alpha: Option<f64>,
}

fn alpha<T: Ord + Clone>(
    name: &str,
    votes: &BTreeMap<&str, BTreeMap<&str, T>>,
    annotators: &BTreeSet<&str>,
    metric: AlphaMetric,
) -> Option<f64> {
    let units: Vec<Vec<Option<T>>> = votes
        .values()
        .map(|by| annotators.iter().map(|a| by.get(a).cloned()).collect())
        .collect();
    match krippendorff_alpha(&units, metric) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{name} agreement undefined: {e}");
            None
        }
    }
}

pub fn run(config: &RunConfig) -> CliResult<PathBuf> {
    let path = require(&config.annotation.annotations, "--annotations")?;
    let out = require(&config.out, "--out")?;
    let records: Vec<AnnotationRecord> = read_jsonl(path)?;
    log::info!("read {} annotation records from {}", records.len(), path.display());
    let labels = aggregate_all(&records)?;

    let annotators: BTreeSet<&str> = records.iter().map(|r| r.annotator_id.as_str()).collect();
    let mut verification: BTreeMap<&str, BTreeMap<&str, Verification>> = BTreeMap::new();
    let mut specificity = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_unverifiable()) {
        verification
            .entry(r.candidate_id.as_str())
            .or_default()
            .insert(r.annotator_id.as_str(), r.verification);
        if let Some(raw) = r.raw_specificity {
            specificity
                .entry(r.candidate_id.as_str())
                .or_insert_with(BTreeMap::new)
                .insert(r.annotator_id.as_str(), collapse_specificity(raw)?);
        }
    }

    let verified: Vec<_> = labels.iter().filter(|l| l.is_verified()).collect();
    let report = AggregationReport {
        records: records.len(),
        candidates: labels.len(),
        annotators: annotators.len(),
        verified: verified.len(),
        verification_ties_broken: labels.iter().filter(|l| l.tie_broken && !l.is_verified()).count(),
        specificity_ties_broken: verified.iter().filter(|l| l.tie_broken).count(),
        specificity: SpecificityHistogram::from_levels(verified.iter().filter_map(|l| l.specificity)),
        verification_alpha: alpha("verification", &verification, &annotators, AlphaMetric::Nominal),
        specificity_alpha: alpha("specificity", &specificity, &annotators, AlphaMetric::Ordinal),
    };
    log::info!(
        "{} candidates aggregated, {} verified as elaborations",
        report.candidates,
        report.verified
    );
    prepare_file(out)?;
    write_jsonl(out, &labels)?;
    write_json_pretty(&sibling(out, "agreement.json"), &report)?;
    Ok(out.to_path_buf())
}
