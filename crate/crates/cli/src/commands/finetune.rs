use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use elabsimp_core::annotation::DatasetSplits;
use elabsimp_core::corpus::load_corpus_dir;
use elabsimp_core::generation::{
    elaboration_examples, finetune, load_language_model, simplified_document_examples, BigramLm, FinetuneRegime,
    LanguageModel, DEFAULT_BIGRAM_ALPHA, DEFAULT_CACHE_WEIGHT,
};

use super::{prepare_file, read_instances, require};
use crate::config::RunConfig;
use crate::error::CliResult;

pub fn run(config: &RunConfig) -> CliResult<PathBuf> {
    let out = require(&config.out, "--out")?;
    let regime = config.generation.finetune;
    let base: Arc<dyn LanguageModel> = match &config.generation.lm {
        Some(path) => Arc::from(load_language_model(path)?),
        None => {
            log::info!("no --lm given; starting from an empty bigram model");
            Arc::new(BigramLm::empty(DEFAULT_BIGRAM_ALPHA, DEFAULT_CACHE_WEIGHT)?)
        }
    };

    let examples = match regime {
        FinetuneRegime::None => Vec::new(),
        FinetuneRegime::SimplifiedDocuments => {
            let sets = load_corpus_dir(require(&config.corpus.dir, "--corpus")?)?;
            let exclude: BTreeSet<String> = match &config.data.test {
                Some(p) => read_instances(p)?.into_iter().map(|i| i.set_id).collect(),
                None => {
                    log::warn!("no --test given; no article sets are held out from finetuning");
                    BTreeSet::new()
                }
            };
            log::info!("holding out {} article sets that contain test instances", exclude.len());
            simplified_document_examples(&sets, &exclude)
        }
        FinetuneRegime::ElaborationCorpus => {
            let splits = DatasetSplits {
                train: read_instances(require(&config.data.train, "--train")?)?,
                valid: match &config.data.valid {
                    Some(p) => read_instances(p)?,
                    None => Vec::new(),
                },
                test: Vec::new(),
            };
            elaboration_examples(&splits, config.generation.mode)?
        }
    };
    log::info!("finetuning regime {regime} on {} examples", examples.len());
    let tuned = finetune(base, &examples, regime)?;
    for entry in &tuned.metadata().lineage {
        log::info!(
            "lineage: {} ({} examples, {} epochs, lr {}, batch {})",
            entry.regime,
            entry.examples,
            entry.epochs,
            entry.learning_rate,
            entry.batch_size
        );
    }
    prepare_file(out)?;
    tuned.save(out)?;
    Ok(out.to_path_buf())
}
