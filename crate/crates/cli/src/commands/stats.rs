use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use elabsimp_core::alignment::CandidateElaboration;
use elabsimp_core::annotation::{make_splits, AggregatedLabel};
use elabsimp_core::corpus::load_corpus_dir;
use elabsimp_core::evaluation::dataset_stats;
use elabsimp_core::jsonl::read_jsonl;

use super::{prepare_file, read_ids, require};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::runlog::write_json_pretty;

pub fn run(config: &RunConfig) -> CliResult<PathBuf> {
    let out = require(&config.out, "--out")?;
    let a = &config.annotation;
    let sets = match &config.corpus.dir {
        Some(dir) => load_corpus_dir(dir)?,
        None => Vec::new(),
    };
    let candidates: Vec<CandidateElaboration> = match &a.candidates {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let labels: Vec<AggregatedLabel> = match &a.labels {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let splits = if a.expert_ids.is_some() || a.valid_ids.is_some() {
        let ids = |p: &Option<PathBuf>| p.as_deref().map(read_ids).transpose().map(Option::unwrap_or_default);
        Some(make_splits(&labels, &ids(&a.expert_ids)?, &ids(&a.valid_ids)?)?)
    } else {
        None
    };
    let scores: Option<HashMap<String, f64>> = match &config.evaluation.sentence_specificity {
        Some(p) => Some(serde_json::from_str(&fs::read_to_string(p)?)?),
        None => None,
    };
    let report = dataset_stats(&sets, &candidates, &labels, splits.as_ref(), scores.as_ref());
    log::info!(
        "{} article sets, {} candidates, {} annotated, {} verified",
        report.article_sets,
        report.candidates,
        report.annotated,
        report.verified
    );
    if sets.is_empty() && candidates.is_empty() && labels.is_empty() {
        log::warn!("no inputs given; statistics are empty");
    }
    prepare_file(out)?;
    write_json_pretty(out, &report)?;
    Ok(out.to_path_buf())
}
