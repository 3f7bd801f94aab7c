//! Synthetic corpus and annotations shared by the CLI test targets.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use elabsimp_core::alignment::CandidateElaboration;
use elabsimp_core::annotation::{AnnotationRecord, AnnotationSource, Verification};
use elabsimp_core::corpus::{write_article_set, ArticleSet, Document, GradeLevel};

const TOPICS: [(&str, &str, &str); 10] = [
    ("glacier", "Alaska", "scientists"),
    ("volcano", "Iceland", "geologists"),
    ("robot", "Detroit", "engineers"),
    ("forest", "Brazil", "rangers"),
    ("comet", "Chile", "astronomers"),
    ("bridge", "Oregon", "builders"),
    ("desert", "Nevada", "explorers"),
    ("reef", "Australia", "divers"),
    ("market", "Kenya", "traders"),
    ("library", "Boston", "librarians"),
];

const LOW: [&str; 3] = [
    "A {t} is a natural feature that changes over many years.",
    "A {t} is a kind of place that people like to visit.",
    "A {t} is a large thing you can see from far away.",
];
const MEDIUM: [&str; 3] = [
    "Many families live close to it.",
    "Kids often read stories about it.",
    "Some people take photos there every summer.",
];
const HIGH: [&str; 3] = [
    "That is why the town wants answers soon because people feel afraid.",
    "So the mayor made a plan because nobody wanted another surprise.",
    "This matters because the money could help kids instead.",
];

fn original(t: &str, place: &str, group: &str) -> Vec<String> {
    vec![
        format!("In {place}, a team of {group} spent three seasons measuring the {t} with specialized instruments."),
        format!("Their preliminary findings, published in a respected journal, suggested that the {t} was changing faster than expected."),
        "Local officials convened an emergency meeting to discuss potential consequences for nearby communities.".into(),
        "Several residents expressed concern about property values and long-term safety.".into(),
        format!("The {group} recommended continuous monitoring and additional funding for research."),
        "Critics argued that the proposed budget would divert resources from schools and hospitals.".into(),
        "Nevertheless, the regional council approved the measure by a narrow margin.".into(),
        "Researchers expect to publish comprehensive results within two years.".into(),
    ]
}

fn simplified(i: usize, t: &str, place: &str, group: &str) -> Vec<String> {
    vec![
        format!("In {place}, {group} spent three seasons measuring the {t}."),
        LOW[i % 3].replace("{t}", t),
        format!("Their findings suggested that the {t} was changing faster than expected."),
        "Local officials held an emergency meeting to discuss consequences for nearby communities.".into(),
        MEDIUM[i % 3].into(),
        "Several residents worried about property values and long-term safety.".into(),
        format!("The {group} recommended continuous monitoring and more funding for research."),
        HIGH[i % 3].into(),
        "Critics argued that the budget would take resources from schools and hospitals.".into(),
        "Still, the regional council approved the measure by a narrow margin.".into(),
        "Researchers expect to publish results within two years.".into(),
    ]
}

/// Ten article sets, each with an original, a grade-7 copy and a grade-3
/// version holding three inserted elaborations.
pub fn corpus() -> Vec<ArticleSet> {
    TOPICS
        .iter()
        .enumerate()
        .map(|(i, (t, place, group))| {
            let orig = original(t, place, group);
            let docs = vec![
                Document::from_sentences(format!("a{i}-orig"), GradeLevel::Original, &orig).unwrap(),
                Document::from_sentences(format!("a{i}-g7"), GradeLevel::Grade(7), &orig).unwrap(),
                Document::from_sentences(format!("a{i}-g3"), GradeLevel::Grade(3), &simplified(i, t, place, group))
                    .unwrap(),
            ];
            ArticleSet::new(format!("a{i:02}"), docs).unwrap()
        })
        .collect()
}

pub fn write_corpus(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    for set in corpus() {
        let file = fs::File::create(dir.join(format!("{}.jsonl", set.set_id))).unwrap();
        write_article_set(&set, file).unwrap();
    }
}

/// Raw 1..=5 specificity implied by the elaboration templates, or `None`
/// for sentences that are not inserted elaborations.
pub fn intended_specificity(text: &str) -> Option<i64> {
    if LOW.iter().any(|l| l.split("{t}").nth(1).is_some_and(|tail| text.ends_with(tail))) {
        Some(1)
    } else if MEDIUM.contains(&text) {
        Some(3)
    } else if HIGH.contains(&text) {
        Some(5)
    } else {
        None
    }
}

/// Three crowd annotators per candidate, with some disagreement.
pub fn annotations(candidates: &[CandidateElaboration]) -> Vec<AnnotationRecord> {
    let mut out = Vec::new();
    for (n, c) in candidates.iter().enumerate() {
        let intended = intended_specificity(&c.text);
        for (a, annotator) in ["w1", "w2", "w3"].iter().enumerate() {
            let (verification, raw) = match intended {
                Some(_) if a == 2 && n % 4 == 0 => (Verification::NotElaboration, None),
                Some(base) => {
                    let jitter = if a == 1 && n % 3 == 0 { 1 } else { 0 };
                    (Verification::TrueElaboration, Some((base + jitter).clamp(1, 5)))
                }
                None if a == 0 => (Verification::Unrelated, None),
                None => (Verification::NotElaboration, None),
            };
            out.push(AnnotationRecord {
                candidate_id: c.candidate_id.clone(),
                annotator_id: annotator.to_string(),
                source: AnnotationSource::Crowd,
                verification,
                raw_specificity: raw,
                rationale: String::new(),
            });
        }
    }
    out
}

/// Expert (test) and validation ids drawn from the intended elaborations.
/// Test items come from the first four sets and validation items from the
/// next two, so the remaining sets stay available for finetuning.
pub fn split_ids(candidates: &[CandidateElaboration]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut expert = BTreeSet::new();
    let mut valid = BTreeSet::new();
    for c in candidates.iter().filter(|c| intended_specificity(&c.text).is_some()) {
        let set: usize = c.candidate_id[1..3].parse().unwrap();
        match set {
            0..=3 => {
                expert.insert(c.candidate_id.clone());
            }
            4 | 5 => {
                valid.insert(c.candidate_id.clone());
            }
            _ => {}
        }
    }
    (expert, valid)
}

pub fn write_ids(path: &Path, ids: &BTreeSet<String>) {
    let mut text = ids.iter().cloned().collect::<Vec<_>>().join("\n");
    text.push('\n');
    fs::write(path, text).unwrap();
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_elabsimp"))
}

/// Runs the binary in `cwd` and returns its output.
pub fn run_in(cwd: &Path, args: &[&str]) -> Output {
    Command::new(bin()).current_dir(cwd).args(args).output().unwrap()
}

/// Runs the binary and panics with its stderr unless it succeeds.
pub fn run_ok(cwd: &Path, args: &[&str]) -> Output {
    let out = run_in(cwd, args);
    assert!(
        out.status.success(),
        "elabsimp {:?} failed with {:?}:\n{}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Output files of one end-to-end run, relative to its working directory.
pub struct PipelineRun {
    pub outputs: Vec<PathBuf>,
}

/// Runs every stage from a synthetic corpus to BLEU scores inside `dir`,
/// using relative paths so two runs in different directories can be
/// compared byte for byte.
pub fn run_pipeline(dir: &Path, seed: u64) -> PipelineRun {
    use elabsimp_core::jsonl::{read_jsonl, write_jsonl};

    write_corpus(&dir.join("corpus"));
    let seed = seed.to_string();
    run_ok(dir, &["extract", "--corpus", "corpus", "--out", "out/candidates.jsonl", "--jobs", "2"]);
    let candidates: Vec<CandidateElaboration> = read_jsonl(dir.join("out/candidates.jsonl")).unwrap();
    write_jsonl(dir.join("annotations.jsonl"), &annotations(&candidates)).unwrap();
    let (expert, valid) = split_ids(&candidates);
    write_ids(&dir.join("expert_ids.txt"), &expert);
    write_ids(&dir.join("valid_ids.txt"), &valid);

    run_ok(dir, &["aggregate", "--annotations", "annotations.jsonl", "--out", "out/labels.jsonl"]);
    run_ok(
        dir,
        &[
            "splits", "--labels", "out/labels.jsonl", "--candidates", "out/candidates.jsonl", "--corpus", "corpus",
            "--expert-ids", "expert_ids.txt", "--valid-ids", "valid_ids.txt", "--out", "out/splits",
        ],
    );
    run_ok(
        dir,
        &[
            "train-spec", "--train", "out/splits/train.jsonl", "--valid", "out/splits/valid.jsonl", "--variant",
            "Cs+E", "--context-k", "2", "--seed", &seed, "--out", "out/model",
        ],
    );
    run_ok(
        dir,
        &[
            "finetune", "--corpus", "corpus", "--test", "out/splits/test.jsonl", "--regime", "simplified_documents",
            "--out", "out/lm.json",
        ],
    );
    let mut outputs: Vec<PathBuf> = [
        "out/candidates.jsonl",
        "out/candidates.meta.json",
        "out/labels.jsonl",
        "out/labels.agreement.json",
        "out/splits/train.jsonl",
        "out/splits/valid.jsonl",
        "out/splits/test.jsonl",
        "out/splits/manifest.json",
        "out/model/head.bin",
        "out/model/variant.json",
        "out/model/encoder.json",
        "out/model/training.json",
        "out/lm.json",
    ]
    .iter()
    .map(PathBuf::from)
    .collect();
    for strategy in ["greedy", "top_k", "contextual"] {
        let generations = format!("out/gen_{strategy}.jsonl");
        let scores = format!("out/eval_{strategy}.json");
        run_ok(
            dir,
            &[
                "generate", "--lm", "out/lm.json", "--test", "out/splits/test.jsonl", "--model", "out/model",
                "--mode", "C4s", "--strategy", strategy, "--seed", &seed, "--jobs", "3", "--out", &generations,
            ],
        );
        run_ok(
            dir,
            &["evaluate", "--generations", &generations, "--test", "out/splits/test.jsonl", "--out", &scores],
        );
        outputs.push(generations.into());
        outputs.push(scores.into());
    }
    PipelineRun { outputs }
}

/// Resolved-config sidecar that must accompany an output.
pub fn config_sidecar(dir: &Path, output: &Path) -> PathBuf {
    let full = dir.join(output);
    let parent = full.parent().unwrap();
    // Directory outputs keep their config inside the directory.
    if parent.join("run_config.json").exists() && parent != dir.join("out") {
        return parent.join("run_config.json");
    }
    let stem = full.file_stem().unwrap().to_string_lossy().into_owned();
    let stem = stem.split('.').next().unwrap().to_owned();
    parent.join(format!("{stem}.run_config.json"))
}
