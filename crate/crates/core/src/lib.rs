//! Elaboration extraction and curation for parallel simplification corpora,
//! contextual-specificity classification, and specificity-guided
//! elaboration generation and evaluation.
//!
//! The pipeline runs in stages that exchange plain JSON/JSONL files:
//!
//! 1. [`corpus`] loads article sets and picks the lowest-grade simplification.
//! 2. [`alignment`] aligns original and simplified sentences and extracts
//!    unaligned simplified sentences as candidate elaborations.
//! 3. [`annotation`] aggregates human judgments, measures agreement and
//!    builds train/valid/test splits; [`instance`] attaches document context.
//! 4. [`specificity`] trains and evaluates the contextual-specificity classifier.
//! 5. [`generation`] decodes elaborations from a language model, optionally
//!    steered by the classifier.
//! 6. [`evaluation`] scores generations and summarizes the dataset.

pub mod alignment;
pub mod annotation;
pub mod corpus;
pub mod evaluation;
pub mod generation;
pub mod instance;
pub mod jsonl;
pub mod remote;
pub mod specificity;

pub use alignment::{AlignmentResult, CandidateElaboration, SentenceEmbedder, SentenceVector};
pub use annotation::{AggregatedLabel, AnnotationRecord, DatasetSplits, SpecificityLevel, Verification};
pub use corpus::{ArticleSet, Document, GradeLevel, Sentence};
pub use evaluation::{EvalPair, HumanEvalRecord, StatsReport};
pub use generation::{DecodingConfig, GeneratedElaboration, GenerationContext, LanguageModel};
pub use instance::ElaborationInstance;
pub use specificity::{ClassifierReport, ContextVariant, EncodedInput, SpecificityModel};
