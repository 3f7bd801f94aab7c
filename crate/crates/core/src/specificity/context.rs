//! Classifier inputs assembled from an elaboration and its document context.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SpecificityError;
use crate::instance::ElaborationInstance;

pub const CLS_TOKEN: &str = "[CLS]";
pub const SEP_TOKEN: &str = "[SEP]";
pub const CONTEXT_SEP_TOKEN: &str = "[CONTEXT_SEP]";

/// Which of E (elaboration), Cs (preceding simplified sentences) and Co
/// (aligned original region) the classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariantKind {
    #[serde(rename = "E")]
    E,
    #[serde(rename = "Cs+E")]
    CsE,
    #[serde(rename = "Co+E")]
    CoE,
    #[serde(rename = "Co+Cs+E")]
    CoCsE,
    #[serde(rename = "Cs")]
    Cs,
    #[serde(rename = "Co")]
    Co,
    #[serde(rename = "Co+Cs")]
    CoCs,
}

impl VariantKind {
    pub const ALL: [VariantKind; 7] = [
        Self::E,
        Self::CsE,
        Self::CoE,
        Self::CoCsE,
        Self::Cs,
        Self::Co,
        Self::CoCs,
    ];

    pub fn has_elaboration(self) -> bool {
        matches!(self, Self::E | Self::CsE | Self::CoE | Self::CoCsE)
    }

    pub fn has_simplified_context(self) -> bool {
        matches!(self, Self::CsE | Self::CoCsE | Self::Cs | Self::CoCs)
    }

    pub fn has_original_context(self) -> bool {
        matches!(self, Self::CoE | Self::CoCsE | Self::Co | Self::CoCs)
    }

    /// Context-only variants predict the expected specificity before an elaboration exists.
    pub fn is_context_only(self) -> bool {
        !self.has_elaboration()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::E => "E",
            Self::CsE => "Cs+E",
            Self::CoE => "Co+E",
            Self::CoCsE => "Co+Cs+E",
            Self::Cs => "Cs",
            Self::Co => "Co",
            Self::CoCs => "Co+Cs",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantKind {
    type Err = SpecificityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.replace(' ', "");
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(&wanted))
            .ok_or_else(|| SpecificityError::InvalidVariant(s.to_owned()))
    }
}

pub const DEFAULT_CONTEXT_K: usize = 4;
pub const ALLOWED_CONTEXT_K: [usize; 3] = [2, 4, 6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextVariant {
    pub kind: VariantKind,
    /// Preceding simplified sentences used when Cs is part of the input.
    pub k: usize,
}

impl ContextVariant {
    pub fn new(kind: VariantKind, k: usize) -> Result<Self, SpecificityError> {
        if !ALLOWED_CONTEXT_K.contains(&k) {
            return Err(SpecificityError::InvalidContextK(k));
        }
        Ok(Self { kind, k })
    }

    pub fn elaboration_only() -> Self {
        Self {
            kind: VariantKind::E,
            k: DEFAULT_CONTEXT_K,
        }
    }
}

impl fmt::Display for ContextVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.has_simplified_context() {
            write!(f, "{} (k={})", self.kind, self.k)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentRole {
    OriginalContext,
    SimplifiedContext,
    Elaboration,
}

/// One element of the classifier input sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    Segment { role: SegmentRole, text: String },
    /// Separates the original and simplified context.
    ContextSep,
    /// Separates the context from the elaboration.
    Sep,
}

/// Segments in the fixed order original context, simplified context,
/// elaboration, with separators between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedInput {
    pub pieces: Vec<Piece>,
}

impl EncodedInput {
    pub fn segments(&self) -> impl Iterator<Item = (SegmentRole, &str)> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Segment { role, text } => Some((*role, text.as_str())),
            _ => None,
        })
    }

    pub fn roles(&self) -> Vec<SegmentRole> {
        self.segments().map(|(r, _)| r).collect()
    }

    /// `[CLS] Co [CONTEXT_SEP] Cs [SEP] E`, omitting absent parts.
    pub fn render(&self) -> String {
        let mut out = String::from(CLS_TOKEN);
        for piece in &self.pieces {
            out.push(' ');
            match piece {
                Piece::Segment { text, .. } => out.push_str(text),
                Piece::ContextSep => out.push_str(CONTEXT_SEP_TOKEN),
                Piece::Sep => out.push_str(SEP_TOKEN),
            }
        }
        out
    }
}

/// Assembles the classifier input for `instance` under `variant`.
pub fn build_context_input(
    instance: &ElaborationInstance,
    variant: ContextVariant,
) -> Result<EncodedInput, SpecificityError> {
    build_input_for_text(instance, &instance.text, variant)
}

/// Like [`build_context_input`] but with `elaboration` standing in for the
/// gold text; used to score generated candidates in the gold context.
pub fn build_input_for_text(
    instance: &ElaborationInstance,
    elaboration: &str,
    variant: ContextVariant,
) -> Result<EncodedInput, SpecificityError> {
    let kind = variant.kind;
    let mut pieces = Vec::new();
    if kind.has_original_context() {
        if instance.original_window.is_empty() {
            return Err(SpecificityError::MissingWindow {
                instance_id: instance.instance_id.clone(),
                window: "original_window",
            });
        }
        pieces.push(Piece::Segment {
            role: SegmentRole::OriginalContext,
            text: instance.original_window.join(" "),
        });
    }
    if kind.has_simplified_context() {
        if kind.has_original_context() {
            pieces.push(Piece::ContextSep);
        }
        pieces.push(Piece::Segment {
            role: SegmentRole::SimplifiedContext,
            text: instance.preceding_k(variant.k).join(" "),
        });
    }
    if kind.has_elaboration() {
        if !pieces.is_empty() {
            pieces.push(Piece::Sep);
        }
        pieces.push(Piece::Segment {
            role: SegmentRole::Elaboration,
            text: elaboration.to_owned(),
        });
    }
    Ok(EncodedInput { pieces })
}
