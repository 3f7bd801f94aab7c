//! Head-only training of the contextual-specificity classifier.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::context::{build_context_input, ContextVariant, EncodedInput};
use super::encoder::{EncoderDescriptor, TextEncoder};
use super::head::{predict_from_logits, LinearHead, NUM_CLASSES};
use super::metrics::{compute_metrics, RunMetrics};
use super::SpecificityError;
use crate::annotation::SpecificityLevel;
use crate::instance::ElaborationInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// Plain minibatch SGD, optionally with heavy-ball momentum.
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 32,
            learning_rate: 2e-3,
            optimizer: Optimizer::Sgd,
            momentum: 0.0,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    fn validate(&self) -> Result<(), SpecificityError> {
        if self.batch_size == 0 {
            return Err(SpecificityError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(SpecificityError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(SpecificityError::InvalidConfig(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub valid: Option<RunMetrics>,
}

/// Frozen encoder identity plus a trained three-way linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecificityModel {
    pub variant: ContextVariant,
    pub encoder: EncoderDescriptor,
    pub encoder_fingerprint: String,
    pub head: LinearHead,
    pub training: TrainingConfig,
    pub history: Vec<EpochMetrics>,
    /// Training inputs the encoder had to truncate.
    pub truncated_inputs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub level: SpecificityLevel,
    pub probabilities: [f64; NUM_CLASSES],
}

fn gold(instance: &ElaborationInstance) -> Result<SpecificityLevel, SpecificityError> {
    instance
        .specificity
        .ok_or_else(|| SpecificityError::MissingLabel(instance.instance_id.clone()))
}

/// Encoded vectors, class indices and the number of truncated inputs.
pub(crate) type EncodedSet = (Vec<Vec<f64>>, Vec<usize>, usize);

/// Encodes labelled instances once.
pub(crate) fn encode_labelled(
    instances: &[ElaborationInstance],
    variant: ContextVariant,
    encoder: &dyn TextEncoder,
) -> Result<EncodedSet, SpecificityError> {
    let mut vectors = Vec::with_capacity(instances.len());
    let mut labels = Vec::with_capacity(instances.len());
    let mut truncated = 0;
    for inst in instances {
        labels.push(gold(inst)?.index());
        let enc = encoder.encode(&build_context_input(inst, variant)?)?;
        if enc.vector.len() != encoder.dim() {
            return Err(SpecificityError::Backend(format!(
                "encoder returned {} components, expected {}",
                enc.vector.len(),
                encoder.dim()
            )));
        }
        truncated += usize::from(enc.truncated);
        vectors.push(enc.vector);
    }
    Ok((vectors, labels, truncated))
}

/// Trains only the linear head; the encoder is borrowed immutably and its
/// outputs are computed once, then perturbed by the encoder's dropout each
/// epoch. Deterministic for a fixed `config.seed`.
pub fn train_classifier(
    train: &[ElaborationInstance],
    valid: &[ElaborationInstance],
    variant: ContextVariant,
    config: &TrainingConfig,
    encoder: &dyn TextEncoder,
) -> Result<SpecificityModel, SpecificityError> {
    if train.is_empty() {
        return Err(SpecificityError::EmptyTrainingSet);
    }
    config.validate()?;
    let fingerprint = encoder.parameter_fingerprint();
    let (vectors, labels, truncated) = encode_labelled(train, variant, encoder)?;
    let valid_encoded = if valid.is_empty() {
        None
    } else {
        Some(encode_labelled(valid, variant, encoder)?)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut head = LinearHead::random(encoder.dim(), &mut rng);
    let mut velocity = LinearHead::zeros(encoder.dim());
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let dropped: Vec<Vec<f64>> = chunk
                .iter()
                .map(|&i| {
                    let mut v = vectors[i].clone();
                    encoder.apply_dropout(&mut v, &mut rng);
                    v
                })
                .collect();
            let batch: Vec<(&[f64], usize)> = dropped
                .iter()
                .zip(chunk)
                .map(|(v, &i)| (v.as_slice(), labels[i]))
                .collect();
            let (loss, grad) = head.loss_and_gradient(&batch);
            loss_sum += loss * chunk.len() as f64;
            if config.momentum > 0.0 {
                for (v, g) in velocity.weights.iter_mut().zip(&grad.weights) {
                    *v = config.momentum * *v + g;
                }
                for (v, g) in velocity.bias.iter_mut().zip(&grad.bias) {
                    *v = config.momentum * *v + g;
                }
                let update = super::head::HeadGradient {
                    weights: velocity.weights.clone(),
                    bias: velocity.bias,
                };
                head.step(&update, config.learning_rate);
            } else {
                head.step(&grad, config.learning_rate);
            }
        }
        let train_pred: Vec<usize> = vectors
            .iter()
            .map(|v| predict_from_logits(&head.logits(v)).0.index())
            .collect();
        let correct = train_pred.iter().zip(&labels).filter(|(p, g)| p == g).count();
        let valid_metrics = valid_encoded
            .as_ref()
            .map(|(vv, vl, _)| metrics_for(&head, vv, vl, config.seed))
            .transpose()?;
        log::debug!(
            "epoch {} loss {:.4} train acc {:.4}",
            epoch + 1,
            loss_sum / vectors.len() as f64,
            correct as f64 / vectors.len() as f64
        );
        history.push(EpochMetrics {
            epoch: epoch + 1,
            train_loss: loss_sum / vectors.len() as f64,
            train_accuracy: correct as f64 / vectors.len() as f64,
            valid: valid_metrics,
        });
    }

    if encoder.parameter_fingerprint() != fingerprint {
        return Err(SpecificityError::EncoderChanged);
    }
    Ok(SpecificityModel {
        variant,
        encoder: encoder.descriptor(),
        encoder_fingerprint: fingerprint,
        head,
        training: config.clone(),
        history,
        truncated_inputs: truncated,
    })
}

fn metrics_for(
    head: &LinearHead,
    vectors: &[Vec<f64>],
    labels: &[usize],
    seed: u64,
) -> Result<RunMetrics, SpecificityError> {
    let to_level = |i: usize| SpecificityLevel::from_index(i).expect("class index");
    let gold: Vec<SpecificityLevel> = labels.iter().map(|&i| to_level(i)).collect();
    let pred: Vec<SpecificityLevel> = vectors
        .iter()
        .map(|v| predict_from_logits(&head.logits(v)).0)
        .collect();
    compute_metrics(&gold, &pred, seed)
}

impl SpecificityModel {
    fn check_encoder(&self, encoder: &dyn TextEncoder) -> Result<(), SpecificityError> {
        if encoder.dim() != self.head.dim || encoder.parameter_fingerprint() != self.encoder_fingerprint {
            return Err(SpecificityError::EncoderMismatch {
                expected: self.encoder.name(),
                found: encoder.descriptor().name(),
            });
        }
        Ok(())
    }
}

/// Softmax probabilities and the argmax level (ties toward lower specificity).
pub fn predict_specificity(
    model: &SpecificityModel,
    encoder: &dyn TextEncoder,
    input: &EncodedInput,
) -> Result<Prediction, SpecificityError> {
    model.check_encoder(encoder)?;
    let enc = encoder.encode(input)?;
    let (level, probabilities) = predict_from_logits(&model.head.logits(&enc.vector));
    Ok(Prediction {
        level,
        probabilities,
    })
}

/// Predicts every instance under the model's own variant.
pub fn predict_instances(
    model: &SpecificityModel,
    encoder: &dyn TextEncoder,
    instances: &[ElaborationInstance],
) -> Result<Vec<Prediction>, SpecificityError> {
    instances
        .iter()
        .map(|inst| predict_specificity(model, encoder, &build_context_input(inst, model.variant)?))
        .collect()
}
