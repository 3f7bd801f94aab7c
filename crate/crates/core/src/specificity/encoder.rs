//! Frozen text encoders producing one pooled vector per input.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::context::{EncodedInput, Piece, SegmentRole, CLS_TOKEN, CONTEXT_SEP_TOKEN, SEP_TOKEN};
use super::SpecificityError;
use crate::alignment::{fnv1a, splitmix64};
use crate::corpus::tokenize;

/// Pooled representation of one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub vector: Vec<f64>,
    /// Set when the backend dropped tokens beyond its length limit.
    pub truncated: bool,
}

/// Serializable identity of an encoder backend, stored with trained models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum EncoderDescriptor {
    HashBag {
        dim: usize,
        seed: u64,
        max_tokens: usize,
        dropout: f64,
    },
    Remote {
        url: String,
        dim: usize,
    },
    /// An encoder supplied in-process by the caller; it cannot be rebuilt
    /// from the descriptor alone.
    External {
        name: String,
        dim: usize,
    },
}

impl EncoderDescriptor {
    pub fn build(&self) -> Result<Box<dyn TextEncoder + Send + Sync>, SpecificityError> {
        match self {
            EncoderDescriptor::HashBag {
                dim,
                seed,
                max_tokens,
                dropout,
            } => Ok(Box::new(
                HashBagEncoder::new(*dim, *seed)
                    .with_max_tokens(*max_tokens)
                    .with_dropout(*dropout)?,
            )),
            EncoderDescriptor::Remote { url, dim } => {
                Ok(Box::new(crate::remote::RemoteEncoder::new(url.clone(), *dim)))
            }
            EncoderDescriptor::External { name, .. } => Err(SpecificityError::Backend(format!(
                "external encoder {name:?} must be supplied by the caller"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            EncoderDescriptor::HashBag { dim, seed, .. } => format!("hash-bag(dim={dim},seed={seed})"),
            EncoderDescriptor::Remote { url, .. } => format!("remote({url})"),
            EncoderDescriptor::External { name, .. } => format!("external({name})"),
        }
    }
}

/// A frozen encoder. Training only ever borrows it immutably.
pub trait TextEncoder {
    fn descriptor(&self) -> EncoderDescriptor;
    fn dim(&self) -> usize;
    fn encode(&self, input: &EncodedInput) -> Result<Encoding, SpecificityError>;

    /// Dropout rate applied to encodings while the head is being trained.
    fn dropout(&self) -> f64 {
        0.0
    }

    /// Inverted dropout on a training-time encoding.
    fn apply_dropout(&self, vector: &mut [f64], rng: &mut dyn RngCore) {
        let p = self.dropout();
        if p <= 0.0 {
            return;
        }
        let keep = 1.0 - p;
        for v in vector.iter_mut() {
            if rng.random::<f64>() < p {
                *v = 0.0;
            } else {
                *v /= keep;
            }
        }
    }

    /// Hex SHA-256 over everything that determines the encoder's output.
    fn parameter_fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(&self.descriptor()).unwrap_or_default();
        hex_digest(&bytes)
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub const DEFAULT_ENCODER_DIM: usize = 256;
pub const DEFAULT_MAX_TOKENS: usize = 512;
pub const DEFAULT_ENCODER_DROPOUT: f64 = 0.1;

/// Bag of signed hashed features over role-tagged tokens, L2-normalized.
///
/// Each token contributes ±1 to one of `dim` buckets, chosen from the hash of
/// its segment role and text, so the same word inside the elaboration and
/// inside the context lands on different features. A constant `[CLS]`
/// feature keeps every vector nonzero.
#[derive(Debug, Clone)]
pub struct HashBagEncoder {
    dim: usize,
    seed: u64,
    max_tokens: usize,
    dropout: f64,
}

impl Default for HashBagEncoder {
    fn default() -> Self {
        Self::new(DEFAULT_ENCODER_DIM, 0)
    }
}

impl HashBagEncoder {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "encoder dimension must be positive");
        Self {
            dim,
            seed,
            max_tokens: DEFAULT_MAX_TOKENS,
            dropout: DEFAULT_ENCODER_DROPOUT,
        }
    }

    pub fn with_max_tokens(mut self, max_tokens: usize) -> Self {
        self.max_tokens = max_tokens.max(1);
        self
    }

    pub fn with_dropout(mut self, dropout: f64) -> Result<Self, SpecificityError> {
        if !(0.0..1.0).contains(&dropout) {
            return Err(SpecificityError::InvalidConfig(format!(
                "dropout must be in [0, 1), got {dropout}"
            )));
        }
        self.dropout = dropout;
        Ok(self)
    }

    fn tagged_tokens(input: &EncodedInput) -> Vec<String> {
        let mut tokens = vec![CLS_TOKEN.to_owned()];
        for piece in &input.pieces {
            match piece {
                Piece::Segment { role, text } => {
                    let tag = match role {
                        SegmentRole::OriginalContext => "co",
                        SegmentRole::SimplifiedContext => "cs",
                        SegmentRole::Elaboration => "e",
                    };
                    tokens.extend(tokenize(text).into_iter().map(|t| format!("{tag}:{t}")));
                }
                Piece::ContextSep => tokens.push(CONTEXT_SEP_TOKEN.to_owned()),
                Piece::Sep => tokens.push(SEP_TOKEN.to_owned()),
            }
        }
        tokens
    }

    fn bucket(&self, token: &str) -> (usize, f64) {
        let mut state = fnv1a(token.as_bytes()) ^ self.seed;
        let h = splitmix64(&mut state);
        let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
        ((h >> 1) as usize % self.dim, sign)
    }
}

impl TextEncoder for HashBagEncoder {
    fn descriptor(&self) -> EncoderDescriptor {
        EncoderDescriptor::HashBag {
            dim: self.dim,
            seed: self.seed,
            max_tokens: self.max_tokens,
            dropout: self.dropout,
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, input: &EncodedInput) -> Result<Encoding, SpecificityError> {
        let mut tokens = Self::tagged_tokens(input);
        let truncated = tokens.len() > self.max_tokens;
        tokens.truncate(self.max_tokens);
        let mut vector = vec![0.0; self.dim];
        for t in &tokens {
            let (i, sign) = self.bucket(t);
            vector[i] += sign;
        }
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            vector.iter_mut().for_each(|v| *v /= norm);
        } else {
            // every token cancelled out; fall back to the [CLS] feature alone
            let (i, sign) = self.bucket(CLS_TOKEN);
            vector[i] = sign;
        }
        Ok(Encoding { vector, truncated })
    }

    fn dropout(&self) -> f64 {
        self.dropout
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specificity::context::SegmentRole;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn input(text: &str) -> EncodedInput {
        EncodedInput {
            pieces: vec![Piece::Segment {
                role: SegmentRole::Elaboration,
                text: text.into(),
            }],
        }
    }

    #[test]
    fn deterministic_unit_norm() {
        let e = HashBagEncoder::default();
        let a = e.encode(&input("An artery is a tube.")).unwrap();
        assert_eq!(a, e.encode(&input("An artery is a tube.")).unwrap());
        let norm: f64 = a.vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(!a.truncated);
    }

    #[test]
    fn reports_truncation() {
        let e = HashBagEncoder::new(32, 0).with_max_tokens(4);
        assert!(e.encode(&input("one two three four five")).unwrap().truncated);
        assert!(!e.encode(&input("one two")).unwrap().truncated);
    }

    #[test]
    fn roles_change_features() {
        let e = HashBagEncoder::new(4096, 1);
        let ctx = EncodedInput {
            pieces: vec![Piece::Segment {
                role: SegmentRole::SimplifiedContext,
                text: "tube".into(),
            }],
        };
        assert_ne!(e.encode(&ctx).unwrap(), e.encode(&input("tube")).unwrap());
    }

    #[test]
    fn descriptor_round_trip_preserves_fingerprint() {
        let e = HashBagEncoder::new(64, 9).with_dropout(0.2).unwrap();
        let json = serde_json::to_string(&e.descriptor()).unwrap();
        assert!(json.contains("\"backend\":\"hash-bag\""));
        let rebuilt = serde_json::from_str::<EncoderDescriptor>(&json).unwrap().build().unwrap();
        assert_eq!(rebuilt.parameter_fingerprint(), e.parameter_fingerprint());
        assert_ne!(HashBagEncoder::new(64, 10).parameter_fingerprint(), e.parameter_fingerprint());
    }

    #[test]
    fn dropout_scales_survivors() {
        let e = HashBagEncoder::new(8, 0).with_dropout(0.5).unwrap();
        let mut v = vec![1.0; 1000];
        e.apply_dropout(&mut v, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(v.iter().all(|x| *x == 0.0 || *x == 2.0));
        let kept = v.iter().filter(|x| **x > 0.0).count();
        assert!((400..600).contains(&kept));
        assert!(HashBagEncoder::new(8, 0).with_dropout(1.0).is_err());
    }
}
