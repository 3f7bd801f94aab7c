//! In-process language-model backends: an explicit transition table for
//! tests and a trainable add-alpha bigram model.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lm::{
    check_distribution, FinetuneExample, FinetuneHyperparams, LanguageModel, LineageEntry, LmMetadata, TokenId,
    Vocabulary, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN,
};
use super::{GenerationError, LmFile};
use crate::corpus::tokenize;

/// Next-token distributions keyed by the previous generated token.
///
/// The context is ignored; generation starts from the `start` row. Tokens
/// are added with [`TableLm::row`] and every probability is spelled out.
#[derive(Debug, Clone)]
pub struct TableLm {
    vocab: Vocabulary,
    start: Vec<f64>,
    rows: HashMap<TokenId, Vec<f64>>,
}

impl TableLm {
    /// `tokens` must include `</s>`.
    pub fn new<S: AsRef<str>>(tokens: &[S]) -> Result<Self, GenerationError> {
        let vocab = Vocabulary::new(tokens.iter().map(|t| t.as_ref().to_owned()).collect(), EOS_TOKEN)?;
        let n = vocab.len();
        let mut start = vec![0.0; n];
        start[vocab.eos()] = 1.0;
        Ok(Self {
            vocab,
            start,
            rows: HashMap::new(),
        })
    }

    fn dense(&self, probs: &[(&str, f64)]) -> Result<Vec<f64>, GenerationError> {
        let mut row = vec![0.0; self.vocab.len()];
        for (tok, p) in probs {
            let id = self
                .vocab
                .id(tok)
                .ok_or_else(|| GenerationError::InvalidConfig(format!("token {tok:?} not in table vocabulary")))?;
            row[id] += p;
        }
        check_distribution(&row, self.vocab.len())?;
        Ok(row)
    }

    /// Sets the distribution after `prev` (`None` for the first token).
    pub fn row(mut self, prev: Option<&str>, probs: &[(&str, f64)]) -> Result<Self, GenerationError> {
        let row = self.dense(probs)?;
        match prev {
            None => self.start = row,
            Some(tok) => {
                let id = self
                    .vocab
                    .id(tok)
                    .ok_or_else(|| GenerationError::InvalidConfig(format!("token {tok:?} not in table vocabulary")))?;
                self.rows.insert(id, row);
            }
        }
        Ok(self)
    }
}

impl LanguageModel for TableLm {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_distribution(&self, prefix: &[TokenId]) -> Result<Vec<f64>, GenerationError> {
        match prefix.last() {
            None => Ok(self.start.clone()),
            Some(prev) => self.rows.get(prev).cloned().ok_or_else(|| {
                GenerationError::Backend(format!("no table row after {:?}", self.vocab.token(*prev)))
            }),
        }
    }

    fn prompt_ids(&self, _context: &str) -> Result<Vec<TokenId>, GenerationError> {
        Ok(Vec::new())
    }

    fn metadata(&self) -> LmMetadata {
        LmMetadata {
            backend: "table".into(),
            lineage: Vec::new(),
        }
    }
}

pub const DEFAULT_BIGRAM_ALPHA: f64 = 0.01;
pub const DEFAULT_CACHE_WEIGHT: f64 = 0.2;

/// Add-alpha smoothed bigram model with a unigram cache over the prompt.
///
/// Sentences are trained as `<s> w1 .. wn </s>`. A prompt is the context
/// tokens followed by `<s>`; with cache weight λ the next-token
/// distribution is `(1-λ)·bigram + λ·unigram(context)`, which lets the
/// context steer word choice. `<s>` and `<unk>` are never generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigramLm {
    vocab: Vocabulary,
    /// counts[prev][next], sparse.
    #[serde(with = "sparse_rows")]
    counts: Vec<BTreeMap<TokenId, f64>>,
    alpha: f64,
    cache_weight: f64,
    lineage: Vec<LineageEntry>,
}

/// Stores count rows as `[id, count]` pair lists; integer map keys do not
/// survive the tagged file envelope.
mod sparse_rows {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::generation::lm::TokenId;

    pub fn serialize<S: Serializer>(rows: &[BTreeMap<TokenId, f64>], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<Vec<(TokenId, f64)>> = rows.iter().map(|r| r.iter().map(|(k, v)| (*k, *v)).collect()).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BTreeMap<TokenId, f64>>, D::Error> {
        let pairs = Vec::<Vec<(TokenId, f64)>>::deserialize(d)?;
        Ok(pairs.into_iter().map(|r| r.into_iter().collect()).collect())
    }
}

impl BigramLm {
    pub fn empty(alpha: f64, cache_weight: f64) -> Result<Self, GenerationError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(GenerationError::InvalidConfig(format!("alpha must be positive, got {alpha}")));
        }
        if !(0.0..1.0).contains(&cache_weight) {
            return Err(GenerationError::InvalidConfig(format!(
                "cache weight must be in [0, 1), got {cache_weight}"
            )));
        }
        let vocab = Vocabulary::new(
            vec![BOS_TOKEN.to_owned(), EOS_TOKEN.to_owned(), UNK_TOKEN.to_owned()],
            EOS_TOKEN,
        )?;
        Ok(Self {
            counts: vec![BTreeMap::new(); vocab.len()],
            vocab,
            alpha,
            cache_weight,
            lineage: Vec::new(),
        })
    }

    /// Trains from scratch on `sentences`.
    pub fn train<S: AsRef<str>>(sentences: &[S]) -> Result<Self, GenerationError> {
        let mut lm = Self::empty(DEFAULT_BIGRAM_ALPHA, DEFAULT_CACHE_WEIGHT)?;
        for s in sentences {
            lm.add_sentence(s.as_ref(), 1.0);
        }
        Ok(lm)
    }

    pub fn with_cache_weight(mut self, cache_weight: f64) -> Result<Self, GenerationError> {
        if !(0.0..1.0).contains(&cache_weight) {
            return Err(GenerationError::InvalidConfig(format!(
                "cache weight must be in [0, 1), got {cache_weight}"
            )));
        }
        self.cache_weight = cache_weight;
        Ok(self)
    }

    fn bos(&self) -> TokenId {
        self.vocab.bos().expect("bigram vocabulary has <s>")
    }

    fn add_sentence(&mut self, text: &str, weight: f64) {
        let mut prev = self.bos();
        let ids: Vec<TokenId> = tokenize(text).iter().map(|t| self.vocab.insert(t)).collect();
        self.counts.resize(self.vocab.len(), BTreeMap::new());
        for id in ids.into_iter().chain(std::iter::once(self.vocab.eos())) {
            *self.counts[prev].entry(id).or_insert(0.0) += weight;
            prev = id;
        }
    }

    fn generable(&self, id: TokenId) -> bool {
        Some(id) != self.vocab.bos() && Some(id) != self.vocab.unk()
    }

    fn bigram_row(&self, prev: TokenId) -> Vec<f64> {
        let n = self.vocab.len();
        let support = (0..n).filter(|&i| self.generable(i)).count() as f64;
        let row = &self.counts[prev];
        let total: f64 = row.iter().filter(|(id, _)| self.generable(**id)).map(|(_, c)| c).sum();
        let denom = total + self.alpha * support;
        (0..n)
            .map(|i| {
                if self.generable(i) {
                    (row.get(&i).copied().unwrap_or(0.0) + self.alpha) / denom
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Per-token perplexity of `sentences`, each scored as `<s> .. </s>`
    /// without context.
    pub fn perplexity<S: AsRef<str>>(&self, sentences: &[S]) -> f64 {
        let mut nll = 0.0;
        let mut n = 0usize;
        for s in sentences {
            let mut prev = self.bos();
            let ids = self.vocab.encode(s.as_ref());
            for id in ids.into_iter().chain(std::iter::once(self.vocab.eos())) {
                let p = self.bigram_row(prev)[id];
                nll -= p.max(f64::MIN_POSITIVE).ln();
                n += 1;
                prev = id;
            }
        }
        if n == 0 {
            return 1.0;
        }
        (nll / n as f64).exp()
    }

    /// Adds `epochs` passes of target counts. A count model has no step
    /// size, so `learning_rate` and `batch_size` are only recorded.
    pub fn finetuned(&self, examples: &[FinetuneExample], regime: &str, params: &FinetuneHyperparams) -> BigramLm {
        let mut lm = self.clone();
        for _ in 0..params.epochs {
            for ex in examples {
                lm.add_sentence(&ex.target, 1.0);
            }
        }
        lm.lineage.push(LineageEntry {
            regime: regime.to_owned(),
            examples: examples.len(),
            epochs: params.epochs,
            learning_rate: params.learning_rate,
            batch_size: params.batch_size,
        });
        lm
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GenerationError> {
        let text = serde_json::to_string(&LmFile::Bigram(self.clone())).map_err(|e| GenerationError::Backend(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let lm = match serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| GenerationError::Backend(format!("{}: {e}", path.display())))?
        {
            LmFile::Bigram(lm) => lm,
            other => {
                return Err(GenerationError::Backend(format!(
                    "{}: expected a bigram model, found {other:?}",
                    path.display()
                )))
            }
        };
        if lm.counts.len() != lm.vocab.len() || lm.vocab.bos().is_none() {
            return Err(GenerationError::Backend(format!("{}: inconsistent bigram model", path.display())));
        }
        Ok(lm)
    }
}

impl LanguageModel for BigramLm {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_distribution(&self, prefix: &[TokenId]) -> Result<Vec<f64>, GenerationError> {
        if let Some(bad) = prefix.iter().find(|&&id| id >= self.vocab.len()) {
            return Err(GenerationError::Backend(format!("token id {bad} outside vocabulary")));
        }
        let bos = self.bos();
        let start = prefix.iter().rposition(|&id| id == bos);
        let prev = prefix.last().copied().unwrap_or(bos);
        let mut probs = self.bigram_row(prev);
        let context = start.map(|s| &prefix[..s]).unwrap_or(&[]);
        let cached: Vec<TokenId> = context
            .iter()
            .copied()
            .filter(|&id| self.generable(id) && id != self.vocab.eos())
            .collect();
        if self.cache_weight > 0.0 && !cached.is_empty() {
            let lambda = self.cache_weight;
            probs.iter_mut().for_each(|p| *p *= 1.0 - lambda);
            let share = lambda / cached.len() as f64;
            for id in cached {
                probs[id] += share;
            }
        }
        Ok(probs)
    }

    fn prompt_ids(&self, context: &str) -> Result<Vec<TokenId>, GenerationError> {
        let mut ids = self.vocab.encode(context);
        ids.push(self.bos());
        Ok(ids)
    }

    fn metadata(&self) -> LmMetadata {
        LmMetadata {
            backend: "bigram".into(),
            lineage: self.lineage.clone(),
        }
    }

    fn finetune(
        &self,
        examples: &[FinetuneExample],
        regime: &str,
        params: &FinetuneHyperparams,
    ) -> Result<Box<dyn LanguageModel>, GenerationError> {
        Ok(Box::new(self.finetuned(examples, regime, params)))
    }

    fn save(&self, path: &Path) -> Result<(), GenerationError> {
        BigramLm::save(self, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_are_validated() {
        let lm = TableLm::new(&["a", "b", EOS_TOKEN]).unwrap();
        assert!(lm.clone().row(None, &[("a", 0.5)]).is_err());
        assert!(lm.clone().row(Some("zz"), &[("a", 1.0)]).is_err());
        let lm = lm.row(None, &[("a", 0.7), ("b", 0.3)]).unwrap();
        assert_eq!(lm.next_token_distribution(&[]).unwrap(), vec![0.7, 0.3, 0.0]);
        assert!(lm.next_token_distribution(&[0]).is_err());
    }

    /// Counts for "a b", "a c", "b c": rows over {</s>, a, b, c} (BOS/UNK
    /// excluded), alpha = 0.01, support 4.
    #[test]
    fn bigram_probabilities_by_hand() {
        let lm = BigramLm::train(&["a b", "a c", "b c"]).unwrap();
        let v = lm.vocabulary();
        let (a, b, c, eos, bos) = (
            v.id("a").unwrap(),
            v.id("b").unwrap(),
            v.id("c").unwrap(),
            v.eos(),
            v.bos().unwrap(),
        );
        let row = lm.next_token_distribution(&[bos]).unwrap();
        // after <s>: a twice, b once -> total 3
        let denom = 3.0 + 0.04;
        assert!((row[a] - 2.01 / denom).abs() < 1e-12);
        assert!((row[b] - 1.01 / denom).abs() < 1e-12);
        assert!((row[c] - 0.01 / denom).abs() < 1e-12);
        assert_eq!(row[bos], 0.0);
        let row_c = lm.next_token_distribution(&[bos, c]).unwrap();
        assert!((row_c[eos] - 2.01 / 2.04).abs() < 1e-12);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn context_cache_shifts_mass_toward_context_words() {
        let lm = BigramLm::train(&["a b", "a c"]).unwrap();
        let v = lm.vocabulary();
        let (b, c) = (v.id("b").unwrap(), v.id("c").unwrap());
        let prompt = lm.prompt_ids("c c").unwrap();
        let mut prefix = prompt.clone();
        prefix.push(v.id("a").unwrap());
        let with_ctx = lm.next_token_distribution(&prefix).unwrap();
        let without = lm.next_token_distribution(&prefix[prompt.len() - 1..]).unwrap();
        assert!(with_ctx[c] > without[c]);
        assert!(with_ctx[b] < without[b]);
        assert!((with_ctx.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finetune_lowers_perplexity_and_records_lineage() {
        let base = BigramLm::train(&["the cat sat .", "a dog ran ."]).unwrap();
        let corpus = ["the dog sat .", "a cat ran .", "the cat ran ."];
        let examples: Vec<FinetuneExample> = corpus
            .iter()
            .map(|t| FinetuneExample {
                context: String::new(),
                target: (*t).into(),
            })
            .collect();
        let params = FinetuneHyperparams {
            epochs: 3,
            learning_rate: 1e-3,
            batch_size: 8,
        };
        let tuned = base.finetuned(&examples, "elaboration_corpus", &params);
        assert_eq!(tuned.metadata().lineage.len(), 1);
        assert!(base.metadata().lineage.is_empty());
        assert!(tuned.perplexity(&corpus) < base.perplexity(&corpus));
        let boxed = base.finetune(&examples, "elaboration_corpus", &params).unwrap();
        let bos = tuned.bos();
        assert_eq!(
            boxed.next_token_distribution(&[bos]).unwrap(),
            tuned.next_token_distribution(&[bos]).unwrap()
        );
    }

    #[test]
    fn save_load_round_trip() {
        let lm = BigramLm::train(&["x y z ."]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lm.json");
        lm.save(&path).unwrap();
        assert_eq!(BigramLm::load(&path).unwrap(), lm);
    }
}
