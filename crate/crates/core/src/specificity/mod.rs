//! Contextual-specificity classification: context-variant inputs, a frozen
//! encoder with a trained linear head, and evaluation.

mod artifact;
mod context;
mod encoder;
mod head;
mod metrics;
mod train;

use thiserror::Error;

pub use artifact::{decode_head, encode_head, load_model, save_model, HEAD_FORMAT_VERSION};
pub use context::{
    build_context_input, build_input_for_text, ContextVariant, EncodedInput, Piece, SegmentRole, VariantKind,
    ALLOWED_CONTEXT_K, CLS_TOKEN, CONTEXT_SEP_TOKEN, DEFAULT_CONTEXT_K, SEP_TOKEN,
};
pub use encoder::{
    EncoderDescriptor, Encoding, HashBagEncoder, TextEncoder, DEFAULT_ENCODER_DIM, DEFAULT_ENCODER_DROPOUT,
    DEFAULT_MAX_TOKENS,
};
pub use head::{argmax_low, predict_from_logits, softmax, HeadGradient, LinearHead, NUM_CLASSES};
pub use metrics::{
    compute_metrics, confusion_matrix, context_length_ablation, evaluate_classifier, evaluate_model, macro_f1,
    ClassifierReport, ConfusionMatrix, MeanStd, RunMetrics,
};
pub use train::{
    predict_instances, predict_specificity, train_classifier, EpochMetrics, Optimizer, Prediction,
    SpecificityModel, TrainingConfig,
};

#[derive(Debug, Error)]
pub enum SpecificityError {
    #[error("unknown context variant {0:?}")]
    InvalidVariant(String),
    #[error("context length k must be 2, 4 or 6, got {0}")]
    InvalidContextK(usize),
    #[error("instance {instance_id} has no {window} for this variant")]
    MissingWindow {
        instance_id: String,
        window: &'static str,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("evaluation set is empty")]
    EmptyEvaluationSet,
    #[error("no evaluation runs requested")]
    NoRuns,
    #[error("instance {0} has no gold specificity label")]
    MissingLabel(String),
    #[error("model was trained with encoder {expected} but got {found}")]
    EncoderMismatch { expected: String, found: String },
    #[error("encoder parameters changed during training")]
    EncoderChanged,
    #[error("encoder backend error: {0}")]
    Backend(String),
    #[error("malformed model artifact: {0}")]
    BadArtifact(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
