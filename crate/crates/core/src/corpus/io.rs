use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ArticleSet, CorpusError, Document, GradeLevel};

/// One line of an article-set JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub set_id: String,
    pub doc_id: String,
    pub grade_level: GradeLevel,
    pub sentences: Vec<String>,
}

impl From<(&str, &Document)> for CorpusRecord {
    fn from((set_id, doc): (&str, &Document)) -> Self {
        Self {
            set_id: set_id.to_owned(),
            doc_id: doc.doc_id.clone(),
            grade_level: doc.grade_level,
            sentences: doc.sentences.iter().map(|s| s.text.clone()).collect(),
        }
    }
}

/// Parses one article set from JSONL. Blank lines are ignored.
pub fn read_article_set<R: Read>(reader: R) -> Result<ArticleSet, CorpusError> {
    let mut set_id: Option<String> = None;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: format!("<line {line_no}>"),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(&line).map_err(|source| CorpusError::Json {
            line: line_no,
            source,
        })?;
        match &set_id {
            None => set_id = Some(record.set_id.clone()),
            Some(id) if *id != record.set_id => {
                return Err(CorpusError::MixedSetIds {
                    set_id: id.clone(),
                    found: record.set_id,
                    line: line_no,
                })
            }
            Some(_) => {}
        }
        docs.push(Document::from_sentences(
            record.doc_id,
            record.grade_level,
            &record.sentences,
        )?);
    }
    let set_id = set_id.ok_or(CorpusError::EmptyFile)?;
    ArticleSet::new(set_id, docs)
}

pub fn load_article_set(path: impl AsRef<Path>) -> Result<ArticleSet, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_article_set(file)
}

/// Writes every version of the set, in its stored order, one JSON object per line.
pub fn write_article_set<W: Write>(set: &ArticleSet, mut writer: W) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: set.set_id.clone(),
        source,
    };
    for doc in &set.all_versions {
        let record = CorpusRecord::from((set.set_id.as_str(), doc));
        let line = serde_json::to_string(&record).map_err(|source| CorpusError::Json { line: 0, source })?;
        writer.write_all(line.as_bytes()).map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

/// Loads every `*.jsonl` file of a directory, sorted by file name.
pub fn load_corpus_dir(dir: impl AsRef<Path>) -> Result<Vec<ArticleSet>, CorpusError> {
    let dir = dir.as_ref();
    let io_err = |source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.extension().is_some_and(|e| e == "jsonl") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(load_article_set).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO_VERSIONS: &str = concat!(
        r#"{"set_id":"s1","doc_id":"s1.en.0","grade_level":"original","sentences":["The cat sat on the mat.","It purred loudly."]}"#,
        "\n",
        r#"{"set_id":"s1","doc_id":"s1.en.4","grade_level":7,"sentences":["The cat sat.","It purred."]}"#,
        "\n",
        r#"{"set_id":"s1","doc_id":"s1.en.3","grade_level":3,"sentences":["A cat sat.","A cat is a pet.","It purred."]}"#,
        "\n",
    );

    #[test]
    fn loads_well_formed_set() {
        let set = read_article_set(TWO_VERSIONS.as_bytes()).unwrap();
        assert_eq!(set.set_id, "s1");
        assert_eq!(set.original.doc_id, "s1.en.0");
        assert_eq!(set.simplified.doc_id, "s1.en.3");
        assert_eq!(set.simplified.grade_level, GradeLevel::Grade(3));
        assert_eq!(set.all_versions.len(), 3);
        for doc in &set.all_versions {
            for (i, s) in doc.sentences.iter().enumerate() {
                assert_eq!(s.index, i);
            }
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let set = read_article_set(TWO_VERSIONS.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_article_set(&set, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), TWO_VERSIONS);
    }

    #[test]
    fn missing_original_names_the_set() {
        let text = r#"{"set_id":"s9","doc_id":"d","grade_level":3,"sentences":["x"]}"#;
        match read_article_set(text.as_bytes()) {
            Err(CorpusError::MissingOriginal { set_id }) => assert_eq!(set_id, "s9"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_simplified_version() {
        let text = r#"{"set_id":"s2","doc_id":"d","grade_level":"original","sentences":["x"]}"#;
        assert!(matches!(
            read_article_set(text.as_bytes()),
            Err(CorpusError::NoSimplified { .. })
        ));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_grades() {
        let text = r#"{"set_id":"s","doc_id":"d","grade_level":3,"sentences":["x"],"extra":1}"#;
        assert!(matches!(
            read_article_set(text.as_bytes()),
            Err(CorpusError::Json { line: 1, .. })
        ));
        let text = r#"{"set_id":"s","doc_id":"d","grade_level":"orig","sentences":["x"]}"#;
        assert!(matches!(
            read_article_set(text.as_bytes()),
            Err(CorpusError::Json { .. })
        ));
    }

    #[test]
    fn mixed_set_ids_rejected() {
        let text = concat!(
            r#"{"set_id":"a","doc_id":"d0","grade_level":"original","sentences":["x"]}"#,
            "\n",
            r#"{"set_id":"b","doc_id":"d1","grade_level":3,"sentences":["x"]}"#
        );
        assert!(matches!(
            read_article_set(text.as_bytes()),
            Err(CorpusError::MixedSetIds { line: 2, .. })
        ));
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(read_article_set(&b""[..]), Err(CorpusError::EmptyFile)));
    }

    #[test]
    fn loads_directory_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b", "a"] {
            let body = TWO_VERSIONS.replace("s1", name);
            fs::write(dir.path().join(format!("{name}.jsonl")), body).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let sets = load_corpus_dir(dir.path()).unwrap();
        let ids: Vec<_> = sets.iter().map(|s| s.set_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    proptest! {
        #[test]
        fn write_then_load_is_lossless(
            orig in proptest::collection::vec("[a-zA-Z\"\\\\ é]{1,12}[a-z]", 1..5),
            simp in proptest::collection::vec(proptest::collection::vec("[a-z ]{0,8}[a-z]", 1..4), 1..4),
        ) {
            let mut docs = vec![Document::from_sentences("o", GradeLevel::Original, &orig).unwrap()];
            for (i, sentences) in simp.iter().enumerate() {
                docs.push(Document::from_sentences(format!("v{i}"), GradeLevel::Grade(3 + i as u8), sentences).unwrap());
            }
            let set = ArticleSet::new("p", docs).unwrap();
            let mut first = Vec::new();
            write_article_set(&set, &mut first).unwrap();
            let reloaded = read_article_set(first.as_slice()).unwrap();
            prop_assert_eq!(&reloaded, &set);
            let mut second = Vec::new();
            write_article_set(&reloaded, &mut second).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
