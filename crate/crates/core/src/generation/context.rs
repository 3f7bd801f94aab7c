//! Conditioning text for elaboration generation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GenerationError;
use crate::instance::ElaborationInstance;

/// Which sentences condition the language model. `C2s`/`C4s` use the 2/4
/// preceding simplified sentences, `+Co` adds the aligned original region,
/// and `±` adds the same number of following sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenerationMode {
    #[serde(rename = "C2s")]
    C2s,
    #[serde(rename = "C2s+Co")]
    C2sCo,
    #[serde(rename = "C4s")]
    C4s,
    #[serde(rename = "C2s±")]
    C2sPm,
    #[serde(rename = "C4s±")]
    C4sPm,
}

impl GenerationMode {
    pub const ALL: [GenerationMode; 5] = [Self::C2s, Self::C2sCo, Self::C4s, Self::C2sPm, Self::C4sPm];

    pub fn sentences(self) -> usize {
        match self {
            Self::C2s | Self::C2sCo | Self::C2sPm => 2,
            Self::C4s | Self::C4sPm => 4,
        }
    }

    pub fn uses_original(self) -> bool {
        self == Self::C2sCo
    }

    pub fn uses_following(self) -> bool {
        matches!(self, Self::C2sPm | Self::C4sPm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::C2s => "C2s",
            Self::C2sCo => "C2s+Co",
            Self::C4s => "C4s",
            Self::C2sPm => "C2s±",
            Self::C4sPm => "C4s±",
        }
    }
}

impl fmt::Display for GenerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenerationMode {
    type Err = GenerationError;

    /// Accepts the display names, with `+-` or `pm` as ASCII spellings of `±`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace("+-", "±").replace("pm", "±");
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().to_lowercase() == norm)
            .ok_or_else(|| GenerationError::InvalidConfig(format!("unknown generation mode {s:?}")))
    }
}

/// Where the original region goes relative to the simplified sentences in `C2s+Co`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextOrder {
    #[default]
    OriginalFirst,
    SimplifiedFirst,
}

pub const REGION_SEPARATOR: &str = "\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationContext {
    pub instance_id: String,
    pub mode: GenerationMode,
    pub text: String,
    pub preceding: Vec<String>,
    pub following: Vec<String>,
    pub original: Vec<String>,
}

pub fn build_generation_context(
    instance: &ElaborationInstance,
    mode: GenerationMode,
) -> Result<GenerationContext, GenerationError> {
    build_generation_context_with(instance, mode, ContextOrder::default())
}

/// Regions are joined with a blank line; the elaboration itself never
/// appears, even in the `±` modes.
pub fn build_generation_context_with(
    instance: &ElaborationInstance,
    mode: GenerationMode,
    order: ContextOrder,
) -> Result<GenerationContext, GenerationError> {
    let preceding = instance.preceding_k(mode.sentences()).to_vec();
    let following = if mode.uses_following() {
        instance.following_k(mode.sentences()).to_vec()
    } else {
        Vec::new()
    };
    let original = if mode.uses_original() {
        if instance.original_window.is_empty() {
            return Err(GenerationError::MissingWindow {
                instance_id: instance.instance_id.clone(),
                window: "original_window",
            });
        }
        instance.original_window.clone()
    } else {
        Vec::new()
    };

    let simplified = preceding.join(" ");
    let mut regions: Vec<String> = Vec::new();
    if !original.is_empty() {
        match order {
            ContextOrder::OriginalFirst => regions.extend([original.join(" "), simplified]),
            ContextOrder::SimplifiedFirst => regions.extend([simplified, original.join(" ")]),
        }
    } else {
        regions.push(simplified);
    }
    if !following.is_empty() {
        regions.push(following.join(" "));
    }
    regions.retain(|r| !r.is_empty());
    Ok(GenerationContext {
        instance_id: instance.instance_id.clone(),
        mode,
        text: regions.join(REGION_SEPARATOR),
        preceding,
        following,
        original,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_instance(n: usize, at: usize) -> ElaborationInstance {
        let s = |i: usize| format!("S{i}.");
        ElaborationInstance {
            instance_id: format!("set:{at}"),
            set_id: "set".into(),
            sentence_index: at,
            text: s(at),
            specificity: None,
            preceding: (at.saturating_sub(6)..at).map(s).collect(),
            following: (at + 1..n.min(at + 7)).map(s).collect(),
            original_window: vec!["O1.".into(), "O2.".into()],
        }
    }

    #[test]
    fn two_preceding_sentences() {
        let c = build_generation_context(&doc_instance(10, 5), GenerationMode::C2s).unwrap();
        assert_eq!(c.preceding, ["S3.", "S4."]);
        assert_eq!(c.text, "S3. S4.");
    }

    #[test]
    fn document_start_gives_fewer() {
        let c = build_generation_context(&doc_instance(10, 1), GenerationMode::C4s).unwrap();
        assert_eq!(c.preceding, ["S0."]);
    }

    #[test]
    fn pre_and_post_context_excludes_the_elaboration() {
        let c = build_generation_context(&doc_instance(10, 5), GenerationMode::C4sPm).unwrap();
        assert_eq!(c.preceding, ["S1.", "S2.", "S3.", "S4."]);
        assert_eq!(c.following, ["S6.", "S7.", "S8.", "S9."]);
        assert_eq!(c.text, "S1. S2. S3. S4.\n\nS6. S7. S8. S9.");
        assert!(!c.text.contains("S5."));
    }

    #[test]
    fn original_region_first_by_default() {
        let inst = doc_instance(10, 5);
        let c = build_generation_context(&inst, GenerationMode::C2sCo).unwrap();
        assert_eq!(c.text, "O1. O2.\n\nS3. S4.");
        let c = build_generation_context_with(&inst, GenerationMode::C2sCo, ContextOrder::SimplifiedFirst).unwrap();
        assert_eq!(c.text, "S3. S4.\n\nO1. O2.");
        let mut bare = inst;
        bare.original_window.clear();
        assert!(matches!(
            build_generation_context(&bare, GenerationMode::C2sCo),
            Err(GenerationError::MissingWindow { window: "original_window", .. })
        ));
    }

    #[test]
    fn mode_names() {
        assert_eq!("C4s±".parse::<GenerationMode>().unwrap(), GenerationMode::C4sPm);
        assert_eq!("c2s+-".parse::<GenerationMode>().unwrap(), GenerationMode::C2sPm);
        assert_eq!("C2s+Co".parse::<GenerationMode>().unwrap(), GenerationMode::C2sCo);
        assert!("C3s".parse::<GenerationMode>().is_err());
        assert_eq!(serde_json::to_string(&GenerationMode::C2sPm).unwrap(), "\"C2s±\"");
    }
}
