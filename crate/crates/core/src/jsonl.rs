//! Line-delimited JSON helpers shared by every file format in the crate.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub fn read_jsonl_from<T: DeserializeOwned, R: Read>(reader: R, name: &str) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| JsonlError::Io {
            path: name.to_owned(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| JsonlError::Json {
            path: name.to_owned(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, JsonlError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| JsonlError::Io {
        path: name.clone(),
        source,
    })?;
    read_jsonl_from(file, &name)
}

pub fn write_jsonl_to<T: Serialize, W: Write>(writer: W, items: &[T], name: &str) -> Result<(), JsonlError> {
    let io_err = |source| JsonlError::Io {
        path: name.to_owned(),
        source,
    };
    let mut w = BufWriter::new(writer);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|source| JsonlError::Json {
            path: name.to_owned(),
            line: 0,
            source,
        })?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<(), JsonlError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let file = fs::File::create(path).map_err(|source| JsonlError::Io {
        path: name.clone(),
        source,
    })?;
    write_jsonl_to(file, items, &name)
}
