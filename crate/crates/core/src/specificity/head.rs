//! Three-way linear classification head over pooled encodings.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::SpecificityLevel;

pub const NUM_CLASSES: usize = 3;

/// `logits = x·W + b` with `W ∈ R^{d×3}` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub bias: [f64; NUM_CLASSES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradient {
    pub weights: Vec<f64>,
    pub bias: [f64; NUM_CLASSES],
}

impl LinearHead {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            weights: vec![0.0; dim * NUM_CLASSES],
            bias: [0.0; NUM_CLASSES],
        }
    }

    /// Uniform(-1/√d, 1/√d) initialization for weights and bias.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (dim as f64).sqrt();
        let mut draw = || rng.random_range(-bound..bound);
        let weights = (0..dim * NUM_CLASSES).map(|_| draw()).collect();
        let bias = [draw(), draw(), draw()];
        Self { dim, weights, bias }
    }

    pub fn logits(&self, x: &[f64]) -> [f64; NUM_CLASSES] {
        debug_assert_eq!(x.len(), self.dim);
        let mut out = self.bias;
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            let row = &self.weights[i * NUM_CLASSES..(i + 1) * NUM_CLASSES];
            for c in 0..NUM_CLASSES {
                out[c] += xi * row[c];
            }
        }
        out
    }

    /// Mean cross-entropy over the batch and its gradient with respect to
    /// the head parameters.
    pub fn loss_and_gradient(&self, batch: &[(&[f64], usize)]) -> (f64, HeadGradient) {
        let mut grad = HeadGradient {
            weights: vec![0.0; self.weights.len()],
            bias: [0.0; NUM_CLASSES],
        };
        if batch.is_empty() {
            return (0.0, grad);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for (x, label) in batch {
            let p = softmax(&self.logits(x));
            loss -= p[*label].max(f64::MIN_POSITIVE).ln();
            let mut delta = p;
            delta[*label] -= 1.0;
            for (b, d) in grad.bias.iter_mut().zip(&delta) {
                *b += d * scale;
            }
            for (i, xi) in x.iter().enumerate() {
                if *xi == 0.0 {
                    continue;
                }
                let row = &mut grad.weights[i * NUM_CLASSES..(i + 1) * NUM_CLASSES];
                for (w, d) in row.iter_mut().zip(&delta) {
                    *w += xi * d * scale;
                }
            }
        }
        (loss * scale, grad)
    }

    pub fn step(&mut self, grad: &HeadGradient, learning_rate: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grad.weights) {
            *w -= learning_rate * g;
        }
        for (b, g) in self.bias.iter_mut().zip(&grad.bias) {
            *b -= learning_rate * g;
        }
    }
}

pub fn softmax(logits: &[f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp = logits.map(|l| (l - max).exp());
    let sum: f64 = exp.iter().sum();
    exp.map(|e| e / sum)
}

/// Index of the largest value; ties go to the lower index (lower specificity).
pub fn argmax_low(values: &[f64; NUM_CLASSES]) -> usize {
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if values[c] > values[best] {
            best = c;
        }
    }
    best
}

/// Predicted level and class probabilities for one logit vector.
pub fn predict_from_logits(logits: &[f64; NUM_CLASSES]) -> (SpecificityLevel, [f64; NUM_CLASSES]) {
    let p = softmax(logits);
    let level = SpecificityLevel::from_index(argmax_low(logits)).expect("three classes");
    (level, p)
}
