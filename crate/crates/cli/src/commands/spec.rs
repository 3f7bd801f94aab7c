use std::path::PathBuf;

use elabsimp_core::specificity::{
    context_length_ablation, evaluate_classifier, evaluate_model, load_model, save_model, train_classifier,
    ContextVariant,
};

use super::{prepare_file, read_instances, require};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::runlog::write_json_pretty;

fn variant(config: &RunConfig) -> CliResult<ContextVariant> {
    Ok(ContextVariant::new(config.specificity.variant, config.specificity.context_k)?)
}

pub fn train(config: &RunConfig) -> CliResult<PathBuf> {
    let s = &config.specificity;
    let train = read_instances(require(&config.data.train, "--train")?)?;
    let valid = match &config.data.valid {
        Some(p) => read_instances(p)?,
        None => Vec::new(),
    };
    let out = require(&config.out, "--out")?;
    let variant = variant(config)?;
    let encoder = s.encoder.build()?;
    log::info!("training {variant} head on {} with {}", s.encoder.name(), train.len());
    let model = train_classifier(&train, &valid, variant, &s.training, encoder.as_ref())?;
    for e in &model.history {
        match &e.valid {
            Some(v) => log::info!(
                "epoch {}: loss {:.6} train acc {:.4} valid acc {:.4} macro-F1 {:.4}",
                e.epoch,
                e.train_loss,
                e.train_accuracy,
                v.accuracy,
                v.macro_f1
            ),
            None => log::info!(
                "epoch {}: loss {:.6} train acc {:.4}",
                e.epoch,
                e.train_loss,
                e.train_accuracy
            ),
        }
    }
    if model.truncated_inputs > 0 {
        log::warn!("{} inputs were truncated by the encoder", model.truncated_inputs);
    }
    save_model(&model, out)?;
    Ok(out.to_path_buf())
}

pub fn evaluate(config: &RunConfig) -> CliResult<PathBuf> {
    let s = &config.specificity;
    let test = read_instances(require(&config.data.test, "--test")?)?;
    let out = require(&config.out, "--out")?;
    prepare_file(out)?;

    if let Some(dir) = &s.model {
        let model = load_model(dir)?;
        let encoder = model.encoder.build()?;
        let metrics = evaluate_model(&model, encoder.as_ref(), &test)?;
        log::info!(
            "{} on {} test instances: accuracy {:.4} macro-F1 {:.4}",
            model.variant,
            test.len(),
            metrics.accuracy,
            metrics.macro_f1
        );
        write_json_pretty(out, &metrics)?;
        return Ok(out.to_path_buf());
    }

    let train = read_instances(require(&config.data.train, "--train")?)?;
    let valid = match &config.data.valid {
        Some(p) => read_instances(p)?,
        None => Vec::new(),
    };
    let encoder = s.encoder.build()?;
    let seeds = s.seeds();
    if s.ablation {
        let reports = context_length_ablation(&train, &valid, &test, s.variant, &s.training, encoder.as_ref(), &seeds)?;
        for r in &reports {
            log::info!(
                "{}: accuracy {:.4} ± {:.4} over {} runs",
                r.variant,
                r.accuracy.mean,
                r.accuracy.std,
                r.n_runs
            );
        }
        write_json_pretty(out, &reports)?;
    } else {
        let report = evaluate_classifier(&train, &valid, &test, variant(config)?, &s.training, encoder.as_ref(), &seeds)?;
        log::info!(
            "{}: accuracy {:.4} ± {:.4}, macro-F1 {:.4} ± {:.4} over {} runs",
            report.variant,
            report.accuracy.mean,
            report.accuracy.std,
            report.macro_f1.mean,
            report.macro_f1.std,
            report.n_runs
        );
        write_json_pretty(out, &report)?;
    }
    Ok(out.to_path_buf())
}
