//! JSON-over-HTTP clients for externally hosted models.
//!
//! Sentence embedder: `POST {url}` with `{"texts": [..]}` returns
//! `{"vectors": [[..], ..]}`.
//!
//! Text encoder: `POST {url}` with `{"text": rendered, "segments": [..]}`
//! returns `{"vector": [..], "truncated": bool}`.
//!
//! Language model, relative to a base url:
//! `GET /vocab` returns `{"tokens": [..], "eos": str}`;
//! `POST /next` with `{"prefix": [ids]}` returns `{"probs": [..]}`;
//! `POST /tokenize` with `{"text": str}` returns `{"ids": [..]}`;
//! `POST /finetune` with `{"regime", "examples", "epochs", "learning_rate", "batch_size"}`
//! returns `{"url": str}` naming the finetuned model.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::alignment::{AlignError, SentenceEmbedder, SentenceVector};
use crate::generation::{
    FinetuneExample, FinetuneHyperparams, GenerationError, LanguageModel, LineageEntry, LmFile, LmMetadata, TokenId,
    Vocabulary,
};
use crate::specificity::{EncodedInput, EncoderDescriptor, Encoding, SpecificityError, TextEncoder};

const TIMEOUT: Duration = Duration::from_secs(120);

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(TIMEOUT))
        .build()
        .into()
}

fn post<T: DeserializeOwned>(agent: &ureq::Agent, url: &str, body: &serde_json::Value) -> Result<T, String> {
    agent
        .post(url)
        .send_json(body)
        .map_err(|e| format!("{url}: {e}"))?
        .body_mut()
        .read_json::<T>()
        .map_err(|e| format!("{url}: {e}"))
}

fn get<T: DeserializeOwned>(agent: &ureq::Agent, url: &str) -> Result<T, String> {
    agent
        .get(url)
        .call()
        .map_err(|e| format!("{url}: {e}"))?
        .body_mut()
        .read_json::<T>()
        .map_err(|e| format!("{url}: {e}"))
}

pub struct RemoteEmbedder {
    url: String,
    name: String,
    dim: usize,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct VectorsReply {
    vectors: Vec<Vec<f64>>,
}

impl RemoteEmbedder {
    pub fn new(url: impl Into<String>, dim: usize) -> Self {
        let url = url.into();
        Self {
            name: format!("remote({url})"),
            url,
            dim,
            agent: agent(),
        }
    }
}

impl SentenceEmbedder for RemoteEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<SentenceVector, AlignError> {
        if text.trim().is_empty() {
            return Err(AlignError::EmptyText);
        }
        let reply: VectorsReply = post(&self.agent, &self.url, &json!({ "texts": [text] })).map_err(AlignError::Backend)?;
        let values = reply
            .vectors
            .into_iter()
            .next()
            .ok_or_else(|| AlignError::Backend(format!("{}: empty reply", self.url)))?;
        if values.len() != self.dim {
            return Err(AlignError::DimMismatch(values.len(), self.dim));
        }
        Ok(SentenceVector::new(values))
    }

    fn supports_concurrency(&self) -> bool {
        true
    }
}

pub struct RemoteEncoder {
    url: String,
    dim: usize,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct EncodeReply {
    vector: Vec<f64>,
    #[serde(default)]
    truncated: bool,
}

impl RemoteEncoder {
    pub fn new(url: impl Into<String>, dim: usize) -> Self {
        Self {
            url: url.into(),
            dim,
            agent: agent(),
        }
    }
}

impl TextEncoder for RemoteEncoder {
    fn descriptor(&self) -> EncoderDescriptor {
        EncoderDescriptor::Remote {
            url: self.url.clone(),
            dim: self.dim,
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, input: &EncodedInput) -> Result<Encoding, SpecificityError> {
        let segments: Vec<_> = input.segments().map(|(role, text)| json!({ "role": role, "text": text })).collect();
        let body = json!({ "text": input.render(), "segments": segments });
        let reply: EncodeReply = post(&self.agent, &self.url, &body).map_err(SpecificityError::Backend)?;
        if reply.vector.len() != self.dim {
            return Err(SpecificityError::Backend(format!(
                "{}: got {} components, expected {}",
                self.url,
                reply.vector.len(),
                self.dim
            )));
        }
        Ok(Encoding {
            vector: reply.vector,
            truncated: reply.truncated,
        })
    }
}

pub struct RemoteLm {
    url: String,
    vocab: Vocabulary,
    lineage: Vec<LineageEntry>,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct VocabReply {
    tokens: Vec<String>,
    eos: String,
}

#[derive(Deserialize)]
struct ProbsReply {
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct IdsReply {
    ids: Vec<TokenId>,
}

#[derive(Deserialize)]
struct FinetuneReply {
    url: String,
}

#[derive(Serialize)]
struct FinetuneRequest<'a> {
    regime: &'a str,
    examples: &'a [FinetuneExample],
    epochs: usize,
    learning_rate: f64,
    batch_size: usize,
}

impl RemoteLm {
    /// Fetches the vocabulary from `{url}/vocab`.
    pub fn connect(url: &str) -> Result<Self, GenerationError> {
        let url = url.trim_end_matches('/').to_owned();
        let agent = agent();
        let reply: VocabReply = get(&agent, &format!("{url}/vocab")).map_err(GenerationError::Backend)?;
        Ok(Self {
            vocab: Vocabulary::new(reply.tokens, &reply.eos)?,
            url,
            lineage: Vec::new(),
            agent,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl LanguageModel for RemoteLm {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_distribution(&self, prefix: &[TokenId]) -> Result<Vec<f64>, GenerationError> {
        let reply: ProbsReply = post(&self.agent, &format!("{}/next", self.url), &json!({ "prefix": prefix }))
            .map_err(GenerationError::Backend)?;
        Ok(reply.probs)
    }

    fn prompt_ids(&self, context: &str) -> Result<Vec<TokenId>, GenerationError> {
        let reply: IdsReply = post(&self.agent, &format!("{}/tokenize", self.url), &json!({ "text": context }))
            .map_err(GenerationError::Backend)?;
        if let Some(bad) = reply.ids.iter().find(|&&id| id >= self.vocab.len()) {
            return Err(GenerationError::Backend(format!("tokenizer returned id {bad} outside vocabulary")));
        }
        Ok(reply.ids)
    }

    fn metadata(&self) -> LmMetadata {
        LmMetadata {
            backend: format!("remote({})", self.url),
            lineage: self.lineage.clone(),
        }
    }

    fn finetune(
        &self,
        examples: &[FinetuneExample],
        regime: &str,
        params: &FinetuneHyperparams,
    ) -> Result<Box<dyn LanguageModel>, GenerationError> {
        let request = FinetuneRequest {
            regime,
            examples,
            epochs: params.epochs,
            learning_rate: params.learning_rate,
            batch_size: params.batch_size,
        };
        let body = serde_json::to_value(&request).map_err(|e| GenerationError::Backend(e.to_string()))?;
        let reply: FinetuneReply =
            post(&self.agent, &format!("{}/finetune", self.url), &body).map_err(GenerationError::Backend)?;
        let mut tuned = RemoteLm::connect(&reply.url)?;
        tuned.lineage = self.lineage.clone();
        tuned.lineage.push(LineageEntry {
            regime: regime.to_owned(),
            examples: examples.len(),
            epochs: params.epochs,
            learning_rate: params.learning_rate,
            batch_size: params.batch_size,
        });
        Ok(Box::new(tuned))
    }

    fn save(&self, path: &std::path::Path) -> Result<(), GenerationError> {
        let text = serde_json::to_string(&LmFile::Remote { url: self.url.clone() })
            .map_err(|e| GenerationError::Backend(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread;

    /// Serves one canned JSON reply per expected request and returns the
    /// request bodies it saw.
    fn serve(replies: Vec<(&'static str, String)>) -> (String, thread::JoinHandle<Vec<(String, String)>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let handle = thread::spawn(move || {
            let mut seen = Vec::new();
            for (expected_path, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                let path = request_line.split_whitespace().nth(1).unwrap_or("").to_owned();
                let mut length = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                }
                let mut req_body = vec![0; length];
                reader.read_exact(&mut req_body).unwrap();
                assert_eq!(path, expected_path);
                seen.push((path, String::from_utf8(req_body).unwrap()));
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    body.len(),
                    body
                )
                .unwrap();
            }
            seen
        });
        (url, handle)
    }

    #[test]
    fn embedder_round_trip() {
        let (url, server) = serve(vec![("/", r#"{"vectors":[[1.0,0.0,2.0]]}"#.into())]);
        let e = RemoteEmbedder::new(format!("{url}/"), 3);
        assert_eq!(e.embed("hello").unwrap().values, vec![1.0, 0.0, 2.0]);
        let seen = server.join().unwrap();
        let sent: serde_json::Value = serde_json::from_str(&seen[0].1).unwrap();
        assert_eq!(sent, serde_json::json!({"texts": ["hello"]}));
    }

    #[test]
    fn embedder_dimension_check() {
        let (url, server) = serve(vec![("/", r#"{"vectors":[[1.0]]}"#.into())]);
        assert!(matches!(
            RemoteEmbedder::new(url, 3).embed("x"),
            Err(AlignError::DimMismatch(1, 3))
        ));
        server.join().unwrap();
    }

    #[test]
    fn encoder_reports_truncation() {
        let (url, server) = serve(vec![("/", r#"{"vector":[0.5,0.5],"truncated":true}"#.into())]);
        let enc = RemoteEncoder::new(url, 2);
        let input = EncodedInput { pieces: vec![] };
        let out = enc.encode(&input).unwrap();
        assert!(out.truncated);
        server.join().unwrap();
    }

    #[test]
    fn language_model_protocol() {
        let (url, server) = serve(vec![
            ("/vocab", r#"{"tokens":["hi","</s>"],"eos":"</s>"}"#.into()),
            ("/tokenize", r#"{"ids":[0]}"#.into()),
            ("/next", r#"{"probs":[0.25,0.75]}"#.into()),
        ]);
        let lm = RemoteLm::connect(&url).unwrap();
        assert_eq!(lm.vocabulary().eos(), 1);
        assert_eq!(lm.prompt_ids("hi").unwrap(), vec![0]);
        assert_eq!(lm.next_token_distribution(&[0]).unwrap(), vec![0.25, 0.75]);
        let seen = server.join().unwrap();
        let sent: serde_json::Value = serde_json::from_str(&seen[2].1).unwrap();
        assert_eq!(sent, serde_json::json!({"prefix": [0]}));
    }

    #[test]
    fn unreachable_backend_is_a_backend_error() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        drop(listener);
        assert!(matches!(RemoteLm::connect(&url), Err(GenerationError::Backend(_))));
    }
}
