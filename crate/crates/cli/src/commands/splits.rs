use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use elabsimp_core::alignment::CandidateElaboration;
use elabsimp_core::annotation::{make_splits, AggregatedLabel, SplitManifest};
use elabsimp_core::corpus::load_corpus_dir;
use elabsimp_core::instance::build_instances;
use elabsimp_core::jsonl::{read_jsonl, write_jsonl};

use super::{read_ids, require};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::runlog::write_json_pretty;

pub fn run(config: &RunConfig) -> CliResult<PathBuf> {
    let a = &config.annotation;
    let labels: Vec<AggregatedLabel> = read_jsonl(require(&a.labels, "--labels")?)?;
    let candidates: Vec<CandidateElaboration> = read_jsonl(require(&a.candidates, "--candidates")?)?;
    let sets = load_corpus_dir(require(&config.corpus.dir, "--corpus")?)?;
    let out = require(&config.out, "--out")?;
    let ids = |p: &Option<PathBuf>| p.as_deref().map(read_ids).transpose().map(Option::unwrap_or_default);
    let expert: BTreeSet<String> = ids(&a.expert_ids)?;
    let valid: BTreeSet<String> = ids(&a.valid_ids)?;

    let splits = make_splits(&labels, &expert, &valid)?;
    let manifest = SplitManifest::from_splits(&splits);
    log::info!(
        "splits: train {} / valid {} / test {}",
        splits.train.len(),
        splits.valid.len(),
        splits.test.len()
    );
    let instances = build_instances(splits, &candidates, &sets)?;

    fs::create_dir_all(out)?;
    for (name, part) in instances.named() {
        write_jsonl(out.join(format!("{name}.jsonl")), part)?;
    }
    write_json_pretty(&out.join("manifest.json"), &manifest)?;
    Ok(out.to_path_buf())
}
