mod aggregate;
mod evaluate;
mod extract;
mod finetune;
mod generate;
mod spec;
mod splits;
mod stats;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use elabsimp_core::instance::ElaborationInstance;
use elabsimp_core::jsonl::read_jsonl;
use rayon::ThreadPool;

use crate::args::Command;
use crate::config::RunConfig;
use crate::error::{invalid, CliError, CliResult};
use crate::runlog;

/// Resolves the configuration, runs the stage and records provenance.
pub fn run(command: &Command) -> CliResult<()> {
    let mut config = match &command.common().config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    command.apply(&mut config);
    config.command = command.name().to_owned();
    if config.jobs == 0 {
        return Err(invalid!("--jobs must be at least 1"));
    }
    log::info!("elabsimp {} {}", env!("CARGO_PKG_VERSION"), config.command);
    let out = match command {
        Command::Extract(_) => extract::run(&config)?,
        Command::Aggregate(_) => aggregate::run(&config)?,
        Command::Splits(_) => splits::run(&config)?,
        Command::TrainSpec(_) => spec::train(&config)?,
        Command::EvalSpec(_) => spec::evaluate(&config)?,
        Command::Finetune(_) => finetune::run(&config)?,
        Command::Generate(_) => generate::run(&mut config)?,
        Command::Evaluate(_) => evaluate::run(&config)?,
        Command::Stats(_) => stats::run(&config)?,
    };
    runlog::write_provenance(&out, &config)
}

/// Unwraps a required path, naming the flag that supplies it.
fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    value.as_deref().ok_or_else(|| invalid!("missing required {flag}"))
}

/// Reads candidate ids, one per line; blank lines and `#` comments are skipped.
fn read_ids(path: &Path) -> CliResult<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::validation(e).context(path.display().to_string()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

fn read_instances(path: &Path) -> CliResult<Vec<ElaborationInstance>> {
    let instances: Vec<ElaborationInstance> = read_jsonl(path)?;
    log::info!("read {} instances from {}", instances.len(), path.display());
    Ok(instances)
}

fn thread_pool(jobs: usize) -> CliResult<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| invalid!("cannot start {jobs} worker threads: {e}"))
}

/// Creates the parent directory of an output file.
fn prepare_file(out: &Path) -> CliResult<()> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

/// `<stem>.<suffix>` next to `out`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}
