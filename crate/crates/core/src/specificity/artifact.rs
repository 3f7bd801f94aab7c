//! On-disk model directory.
//!
//! ```text
//! head.bin       "ELSH" | version u16 | reserved u16 | dim u32 | W (dim*3 f64) | b (3 f64), little-endian
//! variant.json   ContextVariant
//! encoder.json   EncoderDescriptor plus parameter fingerprint
//! training.json  TrainingConfig, per-epoch history, truncation count
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::context::ContextVariant;
use super::encoder::EncoderDescriptor;
use super::head::{LinearHead, NUM_CLASSES};
use super::train::{EpochMetrics, SpecificityModel, TrainingConfig};
use super::SpecificityError;

const MAGIC: &[u8; 4] = b"ELSH";
pub const HEAD_FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 12;

pub fn encode_head(head: &LinearHead) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (head.weights.len() + NUM_CLASSES));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&HEAD_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(head.dim as u32).to_le_bytes());
    for w in head.weights.iter().chain(&head.bias) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn decode_head(bytes: &[u8]) -> Result<LinearHead, SpecificityError> {
    let bad = |msg: String| SpecificityError::BadArtifact(msg);
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("head.bin: missing ELSH header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != HEAD_FORMAT_VERSION {
        return Err(bad(format!("head.bin: unsupported format version {version}")));
    }
    let dim = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let n = dim * NUM_CLASSES + NUM_CLASSES;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * n {
        return Err(bad(format!(
            "head.bin: expected {} parameter bytes for dim {dim}, found {}",
            8 * n,
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let (weights, bias) = values.split_at(dim * NUM_CLASSES);
    Ok(LinearHead {
        dim,
        weights: weights.to_vec(),
        bias: [bias[0], bias[1], bias[2]],
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct EncoderFile {
    descriptor: EncoderDescriptor,
    fingerprint: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainingFile {
    config: TrainingConfig,
    history: Vec<EpochMetrics>,
    truncated_inputs: usize,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SpecificityError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| SpecificityError::BadArtifact(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SpecificityError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| SpecificityError::BadArtifact(format!("{}: {e}", path.display())))
}

pub fn save_model(model: &SpecificityModel, dir: impl AsRef<Path>) -> Result<(), SpecificityError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("head.bin"), encode_head(&model.head))?;
    write_json(&dir.join("variant.json"), &model.variant)?;
    write_json(
        &dir.join("encoder.json"),
        &EncoderFile {
            descriptor: model.encoder.clone(),
            fingerprint: model.encoder_fingerprint.clone(),
        },
    )?;
    write_json(
        &dir.join("training.json"),
        &TrainingFile {
            config: model.training.clone(),
            history: model.history.clone(),
            truncated_inputs: model.truncated_inputs,
        },
    )
}

pub fn load_model(dir: impl AsRef<Path>) -> Result<SpecificityModel, SpecificityError> {
    let dir = dir.as_ref();
    let head = decode_head(&fs::read(dir.join("head.bin"))?)?;
    let variant: ContextVariant = read_json(&dir.join("variant.json"))?;
    let variant = ContextVariant::new(variant.kind, variant.k)?;
    let encoder: EncoderFile = read_json(&dir.join("encoder.json"))?;
    let training: TrainingFile = read_json(&dir.join("training.json"))?;
    Ok(SpecificityModel {
        variant,
        encoder: encoder.descriptor,
        encoder_fingerprint: encoder.fingerprint,
        head,
        training: training.config,
        history: training.history,
        truncated_inputs: training.truncated_inputs,
    })
}
