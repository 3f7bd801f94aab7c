//! Deterministic run log and provenance sidecars.
//!
//! Log lines carry no timestamps. Lines emitted inside parallel sections are
//! tagged with the item being processed and re-ordered by item when the log
//! is written, so the file does not depend on thread scheduling.

use std::cell::Cell;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use log::{Level, LevelFilter, Log, Metadata, Record};

use crate::config::RunConfig;
use crate::error::CliResult;

struct Entry {
    phase: usize,
    item: Option<usize>,
    line: String,
}

struct RunLogger {
    entries: Mutex<Vec<Entry>>,
    phase: AtomicUsize,
    echo: LevelFilter,
}

thread_local! {
    static CURRENT_ITEM: Cell<Option<usize>> = const { Cell::new(None) };
}

static LOGGER: OnceLock<RunLogger> = OnceLock::new();

impl Log for RunLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= Level::Info || metadata.target().starts_with("elabsimp")
    }

    fn log(&self, record: &Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        let line = format!("{:<5} {}", record.level(), record.args());
        if record.level() <= self.echo {
            eprintln!("{line}");
        }
        let item = CURRENT_ITEM.with(Cell::get);
        let phase = if item.is_none() {
            self.phase.fetch_add(1, Ordering::SeqCst) + 1
        } else {
            self.phase.load(Ordering::SeqCst)
        };
        self.entries.lock().expect("log lock").push(Entry { phase, item, line });
    }

    fn flush(&self) {}
}

/// Installs the collecting logger. `echo` controls what is mirrored to stderr.
pub fn init(echo: LevelFilter) {
    let logger = LOGGER.get_or_init(|| RunLogger {
        entries: Mutex::new(Vec::new()),
        phase: AtomicUsize::new(0),
        echo,
    });
    if log::set_logger(logger).is_ok() {
        log::set_max_level(LevelFilter::Debug);
    }
}

/// Runs `f` with log lines attributed to `item`.
pub fn with_item<T>(item: usize, f: impl FnOnce() -> T) -> T {
    let previous = CURRENT_ITEM.with(|c| c.replace(Some(item)));
    let out = f();
    CURRENT_ITEM.with(|c| c.set(previous));
    out
}

/// Drains collected lines in deterministic order.
fn take_lines() -> Vec<String> {
    let Some(logger) = LOGGER.get() else {
        return Vec::new();
    };
    let mut entries = std::mem::take(&mut *logger.entries.lock().expect("log lock"));
    entries.sort_by_key(|e| (e.phase, e.item.map_or(0, |i| i + 1)));
    entries.into_iter().map(|e| e.line).collect()
}

/// Where the resolved config and log go for a given output path: inside it
/// when it is a directory, otherwise next to it as `<stem>.run_config.json`
/// and `<stem>.run.log`.
pub fn sidecar_paths(out: &Path) -> (PathBuf, PathBuf) {
    if out.is_dir() {
        return (out.join("run_config.json"), out.join("run.log"));
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    let dir = out.parent().unwrap_or(Path::new(""));
    (
        dir.join(format!("{stem}.run_config.json")),
        dir.join(format!("{stem}.run.log")),
    )
}

/// Writes the resolved configuration and the run log next to `out`.
pub fn write_provenance(out: &Path, config: &RunConfig) -> CliResult<()> {
    let (config_path, log_path) = sidecar_paths(out);
    write_json_pretty(&config_path, config)?;
    let mut text = take_lines().join("\n");
    text.push('\n');
    fs::write(log_path, text)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json_pretty<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
