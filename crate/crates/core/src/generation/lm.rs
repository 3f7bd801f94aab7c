//! Conditional language-model interface.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::GenerationError;
use crate::corpus::tokenize;

pub type TokenId = usize;

pub const EOS_TOKEN: &str = "</s>";
pub const BOS_TOKEN: &str = "<s>";
pub const UNK_TOKEN: &str = "<unk>";

/// Token inventory with a mandatory end-of-sentence marker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyFile", into = "VocabularyFile")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    eos: TokenId,
    bos: Option<TokenId>,
    unk: Option<TokenId>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    tokens: Vec<String>,
    eos: String,
}

impl TryFrom<VocabularyFile> for Vocabulary {
    type Error = GenerationError;

    fn try_from(file: VocabularyFile) -> Result<Self, Self::Error> {
        Vocabulary::new(file.tokens, &file.eos)
    }
}

impl From<Vocabulary> for VocabularyFile {
    fn from(v: Vocabulary) -> Self {
        let eos = v.tokens[v.eos].clone();
        Self { tokens: v.tokens, eos }
    }
}

impl Vocabulary {
    /// Builds a vocabulary; `eos` must be one of `tokens`. Duplicates are an error.
    pub fn new(tokens: Vec<String>, eos: &str) -> Result<Self, GenerationError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(GenerationError::InvalidConfig(format!("duplicate vocabulary token {t:?}")));
            }
        }
        let eos = *index
            .get(eos)
            .ok_or_else(|| GenerationError::InvalidConfig(format!("end-of-sentence token {eos:?} not in vocabulary")))?;
        let bos = index.get(BOS_TOKEN).copied();
        let unk = index.get(UNK_TOKEN).copied();
        Ok(Self {
            tokens,
            index,
            eos,
            bos,
            unk,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn bos(&self) -> Option<TokenId> {
        self.bos
    }

    pub fn unk(&self) -> Option<TokenId> {
        self.unk
    }

    /// Appends `token` if absent and returns its id.
    pub fn insert(&mut self, token: &str) -> TokenId {
        if let Some(id) = self.id(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_owned());
        self.index.insert(token.to_owned(), id);
        id
    }

    /// Maps text to ids with the shared tokenizer; unknown tokens become
    /// `<unk>` when present, otherwise they are dropped.
    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        tokenize(text)
            .iter()
            .filter_map(|t| self.id(t).or(self.unk))
            .collect()
    }
}

/// One finetuning step applied to a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageEntry {
    pub regime: String,
    pub examples: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmMetadata {
    pub backend: String,
    pub lineage: Vec<LineageEntry>,
}

/// Training hyperparameters handed to a backend's finetune routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinetuneHyperparams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

/// A conditioning context paired with the text the model should produce after it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneExample {
    pub context: String,
    pub target: String,
}

pub trait LanguageModel: Send + Sync {
    fn vocabulary(&self) -> &Vocabulary;

    /// Probability of every vocabulary token following `prefix`; sums to 1.
    fn next_token_distribution(&self, prefix: &[TokenId]) -> Result<Vec<f64>, GenerationError>;

    /// Ids that condition generation on `context`.
    fn prompt_ids(&self, context: &str) -> Result<Vec<TokenId>, GenerationError> {
        Ok(self.vocabulary().encode(context))
    }

    /// Generated ids back to text, tokens separated by single spaces.
    fn decode(&self, ids: &[TokenId]) -> String {
        let vocab = self.vocabulary();
        ids.iter()
            .filter(|&&id| id != vocab.eos())
            .map(|&id| vocab.token(id))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn metadata(&self) -> LmMetadata;

    fn finetune(
        &self,
        _examples: &[FinetuneExample],
        _regime: &str,
        _params: &FinetuneHyperparams,
    ) -> Result<Box<dyn LanguageModel>, GenerationError> {
        Err(GenerationError::Capability(format!(
            "backend {} cannot be finetuned",
            self.metadata().backend
        )))
    }

    /// Persists the model so [`super::load_language_model`] can restore it.
    fn save(&self, _path: &std::path::Path) -> Result<(), GenerationError> {
        Err(GenerationError::Capability(format!(
            "backend {} cannot be saved",
            self.metadata().backend
        )))
    }
}

/// Rejects distributions of the wrong length or not summing to 1 ± 1e-6.
pub fn check_distribution(probs: &[f64], vocab_len: usize) -> Result<(), GenerationError> {
    if probs.len() != vocab_len {
        return Err(GenerationError::Backend(format!(
            "distribution has {} entries for a vocabulary of {vocab_len}",
            probs.len()
        )));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(GenerationError::Backend("distribution has negative or non-finite entries".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(GenerationError::Backend(format!("distribution sums to {sum}")));
    }
    Ok(())
}
