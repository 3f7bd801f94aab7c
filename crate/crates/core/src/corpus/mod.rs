//! Parallel article sets: original documents paired with their simplified versions.

mod io;
mod segment;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use io::{load_article_set, load_corpus_dir, read_article_set, write_article_set, CorpusRecord};
pub use segment::{tokenize, RuleSegmenter, SentenceSegmenter, DEFAULT_ABBREVIATIONS};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("article set file is empty")]
    EmptyFile,
    #[error("article set {set_id}: no `original` record")]
    MissingOriginal { set_id: String },
    #[error("article set {set_id}: more than one `original` record")]
    DuplicateOriginal { set_id: String },
    #[error("article set {set_id}: no simplified versions")]
    NoSimplified { set_id: String },
    #[error("article set {set_id}: line {line} belongs to set {found}")]
    MixedSetIds {
        set_id: String,
        found: String,
        line: usize,
    },
    #[error("document {doc_id}: sentence {index} is empty")]
    EmptySentence { doc_id: String, index: usize },
    #[error("no simplified versions to select from")]
    NoVersions,
    #[error("document {doc_id} is the original, not a simplified version")]
    NotSimplified { doc_id: String },
    #[error("{count} simplified versions share the minimal grade {grade}")]
    GradeTie { grade: u8, count: usize },
}

/// School grade of a document, or the unsimplified original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradeLevel {
    Original,
    Grade(u8),
}

impl GradeLevel {
    pub fn grade(self) -> Option<u8> {
        match self {
            GradeLevel::Grade(g) => Some(g),
            GradeLevel::Original => None,
        }
    }
}

impl fmt::Display for GradeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradeLevel::Original => f.write_str("original"),
            GradeLevel::Grade(g) => write!(f, "{g}"),
        }
    }
}

impl Serialize for GradeLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GradeLevel::Original => serializer.serialize_str("original"),
            GradeLevel::Grade(g) => serializer.serialize_u8(*g),
        }
    }
}

impl<'de> Deserialize<'de> for GradeLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Grade(u8),
            Marker(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Grade(g) => Ok(GradeLevel::Grade(g)),
            Repr::Marker(m) if m == "original" => Ok(GradeLevel::Original),
            Repr::Marker(m) => Err(serde::de::Error::custom(format!(
                "grade_level must be an integer or \"original\", got {m:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub index: usize,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(doc_id: impl Into<String>, index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        Self {
            doc_id: doc_id.into(),
            index,
            tokens: tokenize(&text),
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub grade_level: GradeLevel,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Builds a document from already-segmented sentence strings.
    pub fn from_sentences<S: AsRef<str>>(
        doc_id: impl Into<String>,
        grade_level: GradeLevel,
        sentences: &[S],
    ) -> Result<Self, CorpusError> {
        let doc_id = doc_id.into();
        let sentences = sentences
            .iter()
            .enumerate()
            .map(|(index, s)| {
                let text = s.as_ref();
                if text.trim().is_empty() {
                    Err(CorpusError::EmptySentence {
                        doc_id: doc_id.clone(),
                        index,
                    })
                } else {
                    Ok(Sentence::new(doc_id.clone(), index, text))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            doc_id,
            grade_level,
            sentences,
        })
    }

    pub fn from_raw_text(
        doc_id: impl Into<String>,
        grade_level: GradeLevel,
        raw_text: &str,
        segmenter: &dyn SentenceSegmenter,
    ) -> Self {
        let doc_id = doc_id.into();
        let sentences = segment_sentences(&doc_id, raw_text, segmenter);
        Self {
            doc_id,
            grade_level,
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(|s| s.text.as_str())
    }
}

/// Segments `raw_text` into indexed sentences belonging to `doc_id`.
pub fn segment_sentences(
    doc_id: &str,
    raw_text: &str,
    segmenter: &dyn SentenceSegmenter,
) -> Vec<Sentence> {
    segmenter
        .segment(raw_text)
        .into_iter()
        .enumerate()
        .map(|(index, text)| Sentence::new(doc_id, index, text))
        .collect()
}

/// An original article together with its simplified versions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleSet {
    pub set_id: String,
    pub original: Document,
    /// The lowest-grade simplified version.
    pub simplified: Document,
    /// Every document of the set, original included, in file order.
    pub all_versions: Vec<Document>,
}

impl ArticleSet {
    pub fn new(set_id: impl Into<String>, all_versions: Vec<Document>) -> Result<Self, CorpusError> {
        let set_id = set_id.into();
        let mut originals = all_versions
            .iter()
            .filter(|d| d.grade_level == GradeLevel::Original);
        let original = originals
            .next()
            .ok_or_else(|| CorpusError::MissingOriginal {
                set_id: set_id.clone(),
            })?
            .clone();
        if originals.next().is_some() {
            return Err(CorpusError::DuplicateOriginal { set_id });
        }
        let simplified_versions: Vec<&Document> = all_versions
            .iter()
            .filter(|d| d.grade_level != GradeLevel::Original)
            .collect();
        if simplified_versions.is_empty() {
            return Err(CorpusError::NoSimplified { set_id });
        }
        let simplified = select_simplified(&simplified_versions)?.clone();
        Ok(Self {
            set_id,
            original,
            simplified,
            all_versions,
        })
    }

    pub fn simplified_versions(&self) -> impl Iterator<Item = &Document> {
        self.all_versions
            .iter()
            .filter(|d| d.grade_level != GradeLevel::Original)
    }
}

/// Picks the simplified version written for the lowest grade level.
///
/// Two versions sharing the minimal grade is an error: picking one silently
/// would make downstream labels depend on file order.
pub fn select_simplified<D: AsRef<Document>>(versions: &[D]) -> Result<&Document, CorpusError> {
    let mut best: Option<(u8, &Document)> = None;
    let mut ties = 0usize;
    for doc in versions.iter().map(AsRef::as_ref) {
        let grade = doc.grade_level.grade().ok_or_else(|| CorpusError::NotSimplified {
            doc_id: doc.doc_id.clone(),
        })?;
        match best {
            Some((g, _)) if grade > g => {}
            Some((g, _)) if grade == g => ties += 1,
            _ => {
                best = Some((grade, doc));
                ties = 1;
            }
        }
    }
    let (grade, doc) = best.ok_or(CorpusError::NoVersions)?;
    if ties > 1 {
        return Err(CorpusError::GradeTie { grade, count: ties });
    }
    Ok(doc)
}

impl AsRef<Document> for Document {
    fn as_ref(&self) -> &Document {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, grade: u8) -> Document {
        Document::from_sentences(id, GradeLevel::Grade(grade), &["Some text."]).unwrap()
    }

    #[test]
    fn selects_lowest_grade() {
        let versions = vec![doc("a", 12), doc("b", 7), doc("c", 3)];
        assert_eq!(select_simplified(&versions).unwrap().doc_id, "c");
    }

    #[test]
    fn singleton_selection() {
        let versions = vec![doc("only", 5)];
        assert_eq!(select_simplified(&versions).unwrap().doc_id, "only");
    }

    #[test]
    fn tie_is_an_error() {
        let versions = vec![doc("a", 4), doc("b", 4)];
        assert!(matches!(
            select_simplified(&versions),
            Err(CorpusError::GradeTie { grade: 4, count: 2 })
        ));
        // a tie above the minimum is fine
        let versions = vec![doc("a", 8), doc("b", 8), doc("c", 2)];
        assert_eq!(select_simplified(&versions).unwrap().doc_id, "c");
    }

    #[test]
    fn empty_or_original_versions_rejected() {
        let none: Vec<Document> = vec![];
        assert!(matches!(select_simplified(&none), Err(CorpusError::NoVersions)));
        let orig = Document::from_sentences("o", GradeLevel::Original, &["x"]).unwrap();
        assert!(matches!(
            select_simplified(&[orig]),
            Err(CorpusError::NotSimplified { .. })
        ));
    }

    #[test]
    fn empty_sentence_rejected() {
        let err = Document::from_sentences("d", GradeLevel::Grade(3), &["ok", "  "]).unwrap_err();
        assert!(matches!(err, CorpusError::EmptySentence { index: 1, .. }));
    }

    #[test]
    fn raw_text_documents_are_indexed() {
        let d = Document::from_raw_text(
            "d",
            GradeLevel::Grade(3),
            "One. Two!  Three?",
            &RuleSegmenter::default(),
        );
        assert_eq!(d.len(), 3);
        for (i, s) in d.sentences.iter().enumerate() {
            assert_eq!(s.index, i);
            assert_eq!(s.doc_id, "d");
        }
    }

    proptest! {
        #[test]
        fn selection_is_permutation_invariant(
            grades in proptest::collection::hash_set(2u8..13, 1..8),
            seed in any::<u64>(),
        ) {
            let mut versions: Vec<Document> = grades
                .iter()
                .map(|g| doc(&format!("g{g}"), *g))
                .collect();
            let expected = select_simplified(&versions).unwrap().doc_id.clone();
            // deterministic shuffle
            let n = versions.len();
            let mut state = seed;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                versions.swap(i, j);
            }
            prop_assert_eq!(&select_simplified(&versions).unwrap().doc_id, &expected);
            let min = grades.iter().min().unwrap();
            prop_assert_eq!(expected, format!("g{min}"));
        }
    }
}
