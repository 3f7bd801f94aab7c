//! Elaboration generation over pluggable language models.

mod backends;
mod context;
mod decode;
mod finetune;
mod lm;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backends::{BigramLm, TableLm, DEFAULT_BIGRAM_ALPHA, DEFAULT_CACHE_WEIGHT};
pub use context::{
    build_generation_context, build_generation_context_with, ContextOrder, GenerationContext, GenerationMode,
    REGION_SEPARATOR,
};
pub use decode::{
    argmax_token, check_judge_model, contextual_decode, decode_rng, generate, greedy_decode, sample_top_k,
    tempered_weights, top_k_indices, top_k_sample, DecodingConfig, GeneratedElaboration, ModelJudge, Sample,
    Selection, SpecificityJudge, Strategy, DEFAULT_MAX_ATTEMPTS, DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE,
    DEFAULT_TOP_K, ZERO_SHOT_TEMPERATURE,
};
pub use finetune::{elaboration_examples, finetune, simplified_document_examples, test_set_ids, FinetuneRegime};
pub use lm::{
    check_distribution, FinetuneExample, FinetuneHyperparams, LanguageModel, LineageEntry, LmMetadata, TokenId,
    Vocabulary, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN,
};

use crate::annotation::SpecificityLevel;
use crate::specificity::SpecificityError;

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("instance {instance_id} has no {window} for this mode")]
    MissingWindow {
        instance_id: String,
        window: &'static str,
    },
    #[error("language model backend error: {0}")]
    Backend(String),
    #[error("unsupported operation: {0}")]
    Capability(String),
    #[error("no sample succeeded in {attempts} attempts: {last_error}")]
    NoSamples { attempts: usize, last_error: String },
    #[error(transparent)]
    Specificity(#[from] SpecificityError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GenerationError {
    /// Whether the failure came from a model backend rather than from bad input.
    pub fn is_backend(&self) -> bool {
        matches!(
            self,
            Self::Backend(_)
                | Self::NoSamples { .. }
                | Self::Capability(_)
                | Self::Specificity(SpecificityError::Backend(_))
        )
    }
}

/// Serialized form of a saveable language model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub(crate) enum LmFile {
    Bigram(BigramLm),
    Remote { url: String },
}

/// Restores a model written by [`LanguageModel::save`].
pub fn load_language_model(path: impl AsRef<Path>) -> Result<Box<dyn LanguageModel>, GenerationError> {
    let path = path.as_ref();
    let file: LmFile = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| GenerationError::Backend(format!("{}: {e}", path.display())))?;
    match file {
        LmFile::Bigram(_) => Ok(Box::new(BigramLm::load(path)?)),
        LmFile::Remote { url } => Ok(Box::new(crate::remote::RemoteLm::connect(&url)?)),
    }
}

/// One line of generation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub instance_id: String,
    pub mode: GenerationMode,
    pub strategy: Strategy,
    pub text: String,
    pub predicted_specificity: Option<SpecificityLevel>,
    pub target_specificity: Option<SpecificityLevel>,
    pub attempts_used: usize,
    pub seed: u64,
}

impl GenerationRecord {
    pub fn new(
        context: &GenerationContext,
        generated: &GeneratedElaboration,
        target: Option<SpecificityLevel>,
        seed: u64,
    ) -> Self {
        Self {
            instance_id: context.instance_id.clone(),
            mode: context.mode,
            strategy: generated.strategy,
            text: generated.text.clone(),
            predicted_specificity: generated.predicted_specificity,
            target_specificity: target,
            attempts_used: generated.attempts_used,
            seed,
        }
    }
}
