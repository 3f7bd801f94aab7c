//! Serialized run configuration. A `--config` file supplies a base, command
//! line flags override it, and the fully resolved value is written next to
//! every output.

use std::fs;
use std::path::{Path, PathBuf};

use elabsimp_core::alignment::{DEFAULT_HASH_DIM, DEFAULT_RADIUS, DEFAULT_THRESHOLD};
use elabsimp_core::evaluation::Smoothing;
use elabsimp_core::generation::{DecodingConfig, FinetuneRegime, GenerationMode, Selection, Strategy};
use elabsimp_core::specificity::{
    EncoderDescriptor, TrainingConfig, VariantKind, DEFAULT_CONTEXT_K, DEFAULT_ENCODER_DIM, DEFAULT_ENCODER_DROPOUT,
    DEFAULT_MAX_TOKENS,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Classifier runs per reported mean and standard deviation.
pub const DEFAULT_RUNS: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand that produced the output; filled in at run time.
    pub command: String,
    pub corpus: CorpusSection,
    pub alignment: AlignmentSection,
    pub annotation: AnnotationSection,
    pub data: DataSection,
    pub specificity: SpecificitySection,
    pub generation: GenerationSection,
    pub evaluation: EvaluationSection,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            corpus: CorpusSection::default(),
            alignment: AlignmentSection::default(),
            annotation: AnnotationSection::default(),
            data: DataSection::default(),
            specificity: SpecificitySection::default(),
            generation: GenerationSection::default(),
            evaluation: EvaluationSection::default(),
            jobs: 1,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    /// Directory of article-set JSONL files.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentSection {
    /// `hash`, `vectors:<path>` or an `http(s)://` embedding endpoint.
    pub backend: String,
    /// Dimension of the hash embedder, or the expected remote dimension.
    pub dim: usize,
    pub seed: u64,
    pub threshold: f64,
    pub radius: usize,
}

impl Default for AlignmentSection {
    fn default() -> Self {
        Self {
            backend: "hash".into(),
            dim: DEFAULT_HASH_DIM,
            seed: 0,
            threshold: DEFAULT_THRESHOLD,
            radius: DEFAULT_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationSection {
    /// Raw annotation records (JSONL).
    pub annotations: Option<PathBuf>,
    /// Candidate ids, one per line, forming the expert-annotated test split.
    pub expert_ids: Option<PathBuf>,
    /// Candidate ids, one per line, forming the validation split.
    pub valid_ids: Option<PathBuf>,
    /// Aggregated labels (JSONL).
    pub labels: Option<PathBuf>,
    /// Candidate elaborations (JSONL).
    pub candidates: Option<PathBuf>,
}

/// Instance files written by `splits`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecificitySection {
    pub variant: VariantKind,
    pub context_k: usize,
    pub training: TrainingConfig,
    pub encoder: EncoderDescriptor,
    /// Number of evaluation runs; seeds are `training.seed + i`.
    pub runs: usize,
    /// Trained model directory.
    pub model: Option<PathBuf>,
    /// Sweep k over 2, 4 and 6 instead of a single variant.
    pub ablation: bool,
}

impl Default for SpecificitySection {
    fn default() -> Self {
        Self {
            variant: VariantKind::CsE,
            context_k: DEFAULT_CONTEXT_K,
            training: TrainingConfig::default(),
            encoder: EncoderDescriptor::HashBag {
                dim: DEFAULT_ENCODER_DIM,
                seed: 0,
                max_tokens: DEFAULT_MAX_TOKENS,
                dropout: DEFAULT_ENCODER_DROPOUT,
            },
            runs: DEFAULT_RUNS,
            model: None,
            ablation: false,
        }
    }
}

impl SpecificitySection {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.runs as u64).map(|i| self.training.seed.wrapping_add(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    pub mode: GenerationMode,
    pub strategy: Strategy,
    pub top_k: usize,
    /// Unset means 0.45 for a finetuned model and 0.7 for one without
    /// finetune lineage; the resolved value is recorded.
    pub temperature: Option<f64>,
    pub max_tokens: usize,
    pub max_attempts: usize,
    pub selection: Selection,
    pub seed: u64,
    pub finetune: FinetuneRegime,
    /// Saved language model file; `finetune` starts from an empty bigram model without one.
    pub lm: Option<PathBuf>,
    /// Generation records (JSONL) to score.
    pub generations: Option<PathBuf>,
}

impl Default for GenerationSection {
    fn default() -> Self {
        let d = DecodingConfig::default();
        Self {
            mode: GenerationMode::C4s,
            strategy: d.strategy,
            top_k: d.top_k,
            temperature: None,
            max_tokens: d.max_tokens,
            max_attempts: d.max_attempts,
            selection: d.selection,
            seed: d.seed,
            finetune: FinetuneRegime::SimplifiedDocuments,
            lm: None,
            generations: None,
        }
    }
}

impl GenerationSection {
    /// Decoding settings, picking the temperature by finetune state when unset.
    pub fn decoding(&self, zero_shot: bool) -> DecodingConfig {
        let base = if zero_shot {
            DecodingConfig::zero_shot()
        } else {
            DecodingConfig::default()
        };
        DecodingConfig {
            strategy: self.strategy,
            top_k: self.top_k,
            temperature: self.temperature.unwrap_or(base.temperature),
            max_tokens: self.max_tokens,
            max_attempts: self.max_attempts,
            selection: self.selection,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    /// Candidate/reference pairs (JSONL).
    pub pairs: Option<PathBuf>,
    /// Human evaluation records (JSONL).
    pub human_eval: Option<PathBuf>,
    /// BLEU orders to report.
    pub orders: Vec<usize>,
    pub smoothing: Smoothing,
    /// Candidate id -> sentence-specificity score (JSON object).
    pub sentence_specificity: Option<PathBuf>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            pairs: None,
            human_eval: None,
            orders: vec![1, 2],
            smoothing: Smoothing::default(),
            sentence_specificity: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation(e).context(format!("reading config {}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation(e).context(format!("parsing config {}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"alignment": {"threshold": 0.7}}"#).unwrap();
        assert_eq!(c.alignment.threshold, 0.7);
        assert_eq!(c.alignment.radius, DEFAULT_RADIUS);
        assert_eq!(c.specificity.training, TrainingConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"alignmnt": {}}"#).is_err());
    }
}
