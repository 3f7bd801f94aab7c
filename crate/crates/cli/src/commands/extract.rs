use std::path::PathBuf;

use elabsimp_core::alignment::{
    extract_from_set, ExtractionConfig, ExtractionMetadata, HashEmbedder, SentenceEmbedder, WordVectorEmbedder,
};
use elabsimp_core::corpus::load_corpus_dir;
use elabsimp_core::jsonl::write_jsonl;
use elabsimp_core::remote::RemoteEmbedder;
use rayon::prelude::*;

use super::{prepare_file, require, sibling, thread_pool};
use crate::config::{AlignmentSection, RunConfig};
use crate::error::{invalid, CliResult};
use crate::runlog::{with_item, write_json_pretty};

type Embedder = Box<dyn SentenceEmbedder + Send + Sync>;

fn build_embedder(section: &AlignmentSection) -> CliResult<Embedder> {
    let backend = section.backend.as_str();
    if section.dim == 0 {
        return Err(invalid!("embedding dimension must be positive"));
    }
    if backend == "hash" {
        return Ok(Box::new(HashEmbedder::new(section.dim, section.seed)));
    }
    if let Some(path) = backend.strip_prefix("vectors:") {
        return Ok(Box::new(WordVectorEmbedder::from_file(path)?));
    }
    if backend.starts_with("http://") || backend.starts_with("https://") {
        return Ok(Box::new(RemoteEmbedder::new(backend, section.dim)));
    }
    Err(invalid!(
        "unknown alignment backend {backend:?}; expected hash, vectors:<path> or an http(s) URL"
    ))
}

pub fn run(config: &RunConfig) -> CliResult<PathBuf> {
    let dir = require(&config.corpus.dir, "--corpus")?;
    let out = require(&config.out, "--out")?;
    let a = &config.alignment;
    if !a.threshold.is_finite() {
        return Err(invalid!("threshold must be finite, got {}", a.threshold));
    }
    let sets = load_corpus_dir(dir)?;
    log::info!("loaded {} article sets from {}", sets.len(), dir.display());
    let embedder = build_embedder(a)?;
    let extraction = ExtractionConfig {
        threshold: a.threshold,
        radius: a.radius,
    };

    let per_set = if config.jobs > 1 && embedder.supports_concurrency() {
        thread_pool(config.jobs)?.install(|| {
            sets.par_iter()
                .enumerate()
                .map(|(i, set)| with_item(i, || extract_from_set(set, embedder.as_ref(), extraction)))
                .collect::<Vec<_>>()
        })
    } else {
        if config.jobs > 1 {
            log::info!("backend {} is not thread-safe; extracting sequentially", embedder.name());
        }
        sets.iter()
            .map(|set| extract_from_set(set, embedder.as_ref(), extraction))
            .collect()
    };
    let mut candidates = Vec::new();
    for (set, result) in sets.iter().zip(per_set) {
        let found = result.map_err(|e| crate::error::CliError::from(e).context(format!("article set {}", set.set_id)))?;
        log::debug!("{}: {} candidates", set.set_id, found.len());
        candidates.extend(found);
    }

    let metadata = ExtractionMetadata {
        backend: embedder.name().to_owned(),
        dim: embedder.dim(),
        threshold: a.threshold,
        radius: a.radius,
        article_sets: sets.len(),
        simplified_sentences: sets.iter().map(|s| s.simplified.len()).sum(),
        candidates: candidates.len(),
    };
    log::info!(
        "{} of {} simplified sentences left unaligned at threshold {}",
        metadata.candidates,
        metadata.simplified_sentences,
        metadata.threshold
    );
    prepare_file(out)?;
    write_jsonl(out, &candidates)?;
    write_json_pretty(&sibling(out, "meta.json"), &metadata)?;
    Ok(out.to_path_buf())
}
