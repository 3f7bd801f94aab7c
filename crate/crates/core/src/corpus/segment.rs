//! Sentence segmentation and tokenization.

use std::collections::HashSet;

/// Splits raw text into sentence strings.
pub trait SentenceSegmenter {
    fn segment(&self, raw_text: &str) -> Vec<String>;
}

/// Abbreviations (lowercased, without the trailing period) that never end a sentence.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "gen", "gov", "sen", "rep",
    "lt", "col", "sgt", "capt", "rev", "vs", "e.g", "i.e", "no", "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

/// Terminator-based segmenter with an abbreviation exception list.
///
/// A sentence ends after a whitespace-delimited word whose last character
/// (ignoring closing quotes and brackets) is `.`, `!` or `?`, unless the word
/// is a listed abbreviation or a single-letter initial such as `J.`.
/// Whitespace inside a sentence is collapsed to single spaces, so joining the
/// output with `" "` reproduces the whitespace-normalized input.
#[derive(Debug, Clone)]
pub struct RuleSegmenter {
    abbreviations: HashSet<String>,
}

impl Default for RuleSegmenter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl RuleSegmenter {
    pub fn with_abbreviations<'a>(abbrevs: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            abbreviations: abbrevs.into_iter().map(str::to_lowercase).collect(),
        }
    }

    fn ends_sentence(&self, word: &str) -> bool {
        let core = word.trim_end_matches(['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}']);
        let Some(last) = core.chars().last() else {
            return false;
        };
        match last {
            '!' | '?' => true,
            '.' => {
                let stem = core.trim_end_matches('.');
                let stem = stem.trim_start_matches(['"', '\'', '(', '[', '\u{201c}', '\u{2018}']);
                if stem.is_empty() {
                    // "..." on its own
                    return true;
                }
                let mut chars = stem.chars();
                let initial = matches!((chars.next(), chars.next()), (Some(c), None) if c.is_uppercase());
                !(initial || self.abbreviations.contains(&stem.to_lowercase()))
            }
            _ => false,
        }
    }
}

impl SentenceSegmenter for RuleSegmenter {
    fn segment(&self, raw_text: &str) -> Vec<String> {
        let mut sentences = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for word in raw_text.split_whitespace() {
            current.push(word);
            if self.ends_sentence(word) {
                sentences.push(current.join(" "));
                current.clear();
            }
        }
        if !current.is_empty() {
            sentences.push(current.join(" "));
        }
        sentences
    }
}

/// Lowercases and splits text into word and punctuation tokens.
///
/// A token is either a maximal run of alphanumeric characters or a single
/// character that is neither alphanumeric nor whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            word.extend(ch.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !ch.is_whitespace() {
            tokens.push(ch.to_lowercase().collect());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}
