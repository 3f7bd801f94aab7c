use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use elabsimp_core::evaluation::{corpus_bleu_with, kappa_masi, tally_human_eval, BleuScore, EvalPair, HumanEvalRecord};
use elabsimp_core::generation::GenerationRecord;
use elabsimp_core::jsonl::read_jsonl;
use serde::Serialize;

use super::{prepare_file, read_instances, require};
use crate::config::RunConfig;
use crate::error::{invalid, CliResult};
use crate::runlog::write_json_pretty;

#[derive(Debug, Serialize)]
struct HumanEvalSummary {
    records: usize,
    /// Percentage of records selecting each system.
    selected_percent: BTreeMap<String, f64>,
    /// Absent unless exactly two evaluators rated every instance.
    kappa_masi: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EvaluationReport {
    pairs: usize,
    bleu: Vec<BleuScore>,
    human_eval: Option<HumanEvalSummary>,
}

fn load_pairs(config: &RunConfig) -> CliResult<Option<Vec<EvalPair>>> {
    if let Some(path) = &config.evaluation.pairs {
        return Ok(Some(read_jsonl(path)?));
    }
    let Some(path) = &config.generation.generations else {
        return Ok(None);
    };
    let generations: Vec<GenerationRecord> = read_jsonl(path)?;
    let test = read_instances(require(&config.data.test, "--test")?)?;
    let references: HashMap<&str, &str> = test
        .iter()
        .map(|i| (i.instance_id.as_str(), i.text.as_str()))
        .collect();
    generations
        .iter()
        .map(|g| {
            let reference = references
                .get(g.instance_id.as_str())
                .ok_or_else(|| invalid!("generation for {} has no test reference", g.instance_id))?;
            Ok(EvalPair::from_text(g.instance_id.clone(), &g.text, reference))
        })
        .collect::<CliResult<Vec<_>>>()
        .map(Some)
}

pub fn run(config: &RunConfig) -> CliResult<PathBuf> {
    let out = require(&config.out, "--out")?;
    let pairs = load_pairs(config)?;
    let human = config
        .evaluation
        .human_eval
        .as_deref()
        .map(read_jsonl::<HumanEvalRecord>)
        .transpose()?;
    if pairs.is_none() && human.is_none() {
        return Err(invalid!("nothing to evaluate: give --pairs, --generations with --test, or --human-eval"));
    }

    let mut bleu = Vec::new();
    if let Some(pairs) = &pairs {
        for &n in &config.evaluation.orders {
            let score = corpus_bleu_with(pairs, n, config.evaluation.smoothing)?;
            log::info!("BLEU-{n} = {:.3} over {} pairs", score.score_x100, pairs.len());
            bleu.push(score);
        }
    }
    let human_eval = human.map(|records| {
        let kappa = match kappa_masi(&records) {
            Ok(k) => Some(k),
            Err(e) => {
                log::warn!("kappa (MASI) not computed: {e}");
                None
            }
        };
        HumanEvalSummary {
            records: records.len(),
            selected_percent: tally_human_eval(&records),
            kappa_masi: kappa,
        }
    });
    let report = EvaluationReport {
        pairs: pairs.as_ref().map_or(0, Vec::len),
        bleu,
        human_eval,
    };
    prepare_file(out)?;
    write_json_pretty(out, &report)?;
    Ok(out.to_path_buf())
}
