//! Finetuning regimes and the training streams each one consumes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::context::{build_generation_context, GenerationMode};
use super::lm::{FinetuneExample, FinetuneHyperparams, LanguageModel};
use super::GenerationError;
use crate::annotation::DatasetSplits;
use crate::corpus::ArticleSet;
use crate::instance::ElaborationInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinetuneRegime {
    #[default]
    None,
    /// Language modelling over simplified documents.
    SimplifiedDocuments,
    /// Context-to-elaboration pairs from the training and validation splits.
    ElaborationCorpus,
}

impl FinetuneRegime {
    pub const ALL: [FinetuneRegime; 3] = [Self::None, Self::SimplifiedDocuments, Self::ElaborationCorpus];

    pub fn hyperparams(self) -> Option<FinetuneHyperparams> {
        match self {
            Self::None => None,
            Self::SimplifiedDocuments => Some(FinetuneHyperparams {
                epochs: 3,
                learning_rate: 1e-5,
                batch_size: 32,
            }),
            Self::ElaborationCorpus => Some(FinetuneHyperparams {
                epochs: 3,
                learning_rate: 1e-3,
                batch_size: 8,
            }),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::SimplifiedDocuments => "simplified_documents",
            Self::ElaborationCorpus => "elaboration_corpus",
        }
    }
}

impl fmt::Display for FinetuneRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FinetuneRegime {
    type Err = GenerationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == norm)
            .ok_or_else(|| GenerationError::InvalidConfig(format!("unknown finetune regime {s:?}")))
    }
}

/// Sentences of every simplified document outside `exclude_sets`, each
/// paired with the two sentences before it.
pub fn simplified_document_examples(sets: &[ArticleSet], exclude_sets: &BTreeSet<String>) -> Vec<FinetuneExample> {
    let mut out = Vec::new();
    for set in sets.iter().filter(|s| !exclude_sets.contains(&s.set_id)) {
        let texts: Vec<&str> = set.simplified.texts().collect();
        for (i, t) in texts.iter().enumerate() {
            out.push(FinetuneExample {
                context: texts[i.saturating_sub(2)..i].join(" "),
                target: (*t).to_owned(),
            });
        }
    }
    out
}

/// Article sets holding at least one test instance; kept out of document finetuning.
pub fn test_set_ids(splits: &DatasetSplits<ElaborationInstance>) -> BTreeSet<String> {
    splits.test.iter().map(|i| i.set_id.clone()).collect()
}

/// Context-to-elaboration pairs for the training and validation splits.
/// Test instances are never included.
pub fn elaboration_examples(
    splits: &DatasetSplits<ElaborationInstance>,
    mode: GenerationMode,
) -> Result<Vec<FinetuneExample>, GenerationError> {
    splits
        .train
        .iter()
        .chain(&splits.valid)
        .map(|inst| {
            Ok(FinetuneExample {
                context: build_generation_context(inst, mode)?.text,
                target: inst.text.clone(),
            })
        })
        .collect()
}

/// Delegates to the backend with the regime's hyperparameters. Regime
/// `none` hands back the same model.
pub fn finetune(
    lm: Arc<dyn LanguageModel>,
    examples: &[FinetuneExample],
    regime: FinetuneRegime,
) -> Result<Arc<dyn LanguageModel>, GenerationError> {
    let Some(params) = regime.hyperparams() else {
        return Ok(lm);
    };
    if examples.is_empty() {
        return Err(GenerationError::InvalidConfig(format!("regime {regime} got an empty training stream")));
    }
    log::info!(
        "finetuning {} on {} examples ({regime}: {} epochs, lr {}, batch {})",
        lm.metadata().backend,
        examples.len(),
        params.epochs,
        params.learning_rate,
        params.batch_size
    );
    Ok(Arc::from(lm.finetune(examples, regime.as_str(), &params)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, GradeLevel};
    use crate::generation::backends::{BigramLm, TableLm};
    use crate::generation::lm::EOS_TOKEN;

    fn instance(id: &str, set: &str) -> ElaborationInstance {
        ElaborationInstance {
            instance_id: id.into(),
            set_id: set.into(),
            sentence_index: 1,
            text: format!("elab {id}."),
            specificity: None,
            preceding: vec!["before.".into()],
            following: vec!["after.".into()],
            original_window: vec![],
        }
    }

    fn splits() -> DatasetSplits<ElaborationInstance> {
        DatasetSplits {
            train: vec![instance("a", "s1"), instance("b", "s1"), instance("c", "s2")],
            valid: vec![instance("d", "s2")],
            test: vec![instance("e", "s3"), instance("f", "s3")],
        }
    }

    #[test]
    fn none_is_identity() {
        let lm: Arc<dyn LanguageModel> = Arc::new(BigramLm::train(&["a b ."]).unwrap());
        let out = finetune(lm.clone(), &[], FinetuneRegime::None).unwrap();
        assert!(Arc::ptr_eq(&lm, &out));
        assert!(out.metadata().lineage.is_empty());
    }

    #[test]
    fn elaboration_stream_is_train_plus_valid() {
        let ex = elaboration_examples(&splits(), GenerationMode::C2s).unwrap();
        assert_eq!(ex.len(), 4);
        assert!(ex.iter().all(|e| !e.target.contains("elab e") && !e.target.contains("elab f")));
        assert_eq!(ex[0].context, "before.");
    }

    #[test]
    fn document_stream_skips_test_sets() {
        let set = |id: &str| {
            let docs = vec![
                Document::from_sentences(format!("{id}-o"), GradeLevel::Original, &["Orig."]).unwrap(),
                Document::from_sentences(format!("{id}-3"), GradeLevel::Grade(3), &["One.", "Two.", "Three."]).unwrap(),
            ];
            ArticleSet::new(id, docs).unwrap()
        };
        let sets = vec![set("s1"), set("s3")];
        let ex = simplified_document_examples(&sets, &test_set_ids(&splits()));
        assert_eq!(ex.len(), 3);
        assert_eq!(ex[2].context, "One. Two.");
        assert_eq!(ex[2].target, "Three.");
    }

    #[test]
    fn regime_hyperparameters_and_capability_errors() {
        let p = FinetuneRegime::SimplifiedDocuments.hyperparams().unwrap();
        assert_eq!((p.epochs, p.learning_rate, p.batch_size), (3, 1e-5, 32));
        let p = FinetuneRegime::ElaborationCorpus.hyperparams().unwrap();
        assert_eq!((p.epochs, p.learning_rate, p.batch_size), (3, 1e-3, 8));
        let table: Arc<dyn LanguageModel> = Arc::new(TableLm::new(&[EOS_TOKEN]).unwrap());
        let ex = elaboration_examples(&splits(), GenerationMode::C2s).unwrap();
        assert!(matches!(
            finetune(table, &ex, FinetuneRegime::ElaborationCorpus),
            Err(GenerationError::Capability(_))
        ));
    }

    #[test]
    fn bigram_finetune_updates_lineage() {
        let lm: Arc<dyn LanguageModel> = Arc::new(BigramLm::train(&["a b ."]).unwrap());
        let ex = elaboration_examples(&splits(), GenerationMode::C2s).unwrap();
        let tuned = finetune(lm, &ex, FinetuneRegime::ElaborationCorpus).unwrap();
        let lineage = tuned.metadata().lineage;
        assert_eq!(lineage.len(), 1);
        assert_eq!(lineage[0].regime, "elaboration_corpus");
        assert_eq!(lineage[0].examples, 4);
    }
}
