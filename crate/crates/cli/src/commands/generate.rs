use std::path::PathBuf;

use elabsimp_core::generation::{
    build_generation_context, check_judge_model, generate, load_language_model, GenerationRecord, ModelJudge,
    SpecificityJudge, Strategy,
};
use elabsimp_core::instance::ElaborationInstance;
use elabsimp_core::jsonl::write_jsonl;
use elabsimp_core::specificity::{load_model, SpecificityModel, TextEncoder};
use rayon::prelude::*;

use super::{prepare_file, read_instances, require, thread_pool};
use crate::config::RunConfig;
use crate::error::{invalid, CliError, CliResult};
use crate::runlog::with_item;

pub fn run(config: &mut RunConfig) -> CliResult<PathBuf> {
    let lm_path = require(&config.generation.lm, "--lm")?;
    let lm = load_language_model(lm_path)?;
    let zero_shot = lm.metadata().lineage.is_empty();
    let decoding = config.generation.decoding(zero_shot);
    decoding.validate()?;
    // Record the temperature actually used.
    config.generation.temperature = Some(decoding.temperature);
    let g = &config.generation;
    let instances = read_instances(require(&config.data.test, "--test")?)?;
    let out = require(&config.out, "--out")?.to_path_buf();
    log::info!(
        "{} decoding, mode {}, temperature {}{}",
        decoding.strategy,
        g.mode,
        decoding.temperature,
        if zero_shot { " (zero-shot model)" } else { "" }
    );

    let classifier: Option<(SpecificityModel, Box<dyn TextEncoder + Send + Sync>)> =
        if decoding.strategy == Strategy::Contextual {
            let dir = require(&config.specificity.model, "--model")?;
            let model = load_model(dir)?;
            check_judge_model(&model)?;
            let encoder = model.encoder.build()?;
            log::info!("steering with {} classifier from {}", model.variant, dir.display());
            Some((model, encoder))
        } else {
            None
        };
    if classifier.is_some() {
        if let Some(i) = instances.iter().find(|i| i.specificity.is_none()) {
            return Err(invalid!("instance {} has no gold specificity to target", i.instance_id));
        }
    }

    let one = |instance: &ElaborationInstance| -> CliResult<GenerationRecord> {
        let ctx = build_generation_context(instance, g.mode)?;
        let judge = classifier.as_ref().map(|(model, encoder)| ModelJudge {
            model,
            encoder: encoder.as_ref(),
            instance,
        });
        let target = classifier.as_ref().and(instance.specificity);
        let generated = generate(
            lm.as_ref(),
            judge.as_ref().map(|j| j as &dyn SpecificityJudge),
            &ctx,
            target,
            &decoding,
        )
        .map_err(|e| CliError::from(e).context(format!("instance {}", instance.instance_id)))?;
        log::debug!(
            "{}: {:?} ({} attempts)",
            instance.instance_id,
            generated.text,
            generated.attempts_used
        );
        Ok(GenerationRecord::new(&ctx, &generated, instance.specificity, decoding.seed))
    };
    let results: Vec<CliResult<GenerationRecord>> = if config.jobs > 1 {
        thread_pool(config.jobs)?.install(|| {
            instances
                .par_iter()
                .enumerate()
                .map(|(i, inst)| with_item(i, || one(inst)))
                .collect()
        })
    } else {
        instances.iter().map(one).collect()
    };
    let records = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    if classifier.is_some() {
        let matched = records
            .iter()
            .filter(|r| r.predicted_specificity.is_some() && r.predicted_specificity == r.target_specificity)
            .count();
        log::info!("{matched} of {} outputs match their target specificity", records.len());
    }
    prepare_file(&out)?;
    write_jsonl(&out, &records)?;
    log::info!("wrote {} generations to {}", records.len(), out.display());
    Ok(out)
}
