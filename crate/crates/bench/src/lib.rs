//! Deterministic fixtures shared by the benchmarks in `benches/`.

use elabsimp_core::annotation::SpecificityLevel;
use elabsimp_core::corpus::{ArticleSet, Document, GradeLevel};
use elabsimp_core::evaluation::EvalPair;
use elabsimp_core::generation::{BigramLm, GenerationContext, GenerationMode};
use elabsimp_core::instance::ElaborationInstance;

const WORDS: [&str; 32] = [
    "river", "city", "water", "people", "school", "storm", "farm", "road", "market", "bridge", "doctor", "forest",
    "energy", "train", "museum", "island", "winter", "music", "garden", "factory", "harbor", "desert", "village",
    "mountain", "the", "a", "of", "to", "and", "in", "is", "was",
];

/// Small multiplicative hash so fixtures need no RNG dependency.
fn mix(i: usize, j: usize) -> usize {
    let x = (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (j as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    (x >> 17) as usize
}

pub fn sentence(i: usize, len: usize) -> String {
    let words: Vec<&str> = (0..len).map(|j| WORDS[mix(i, j) % WORDS.len()]).collect();
    format!("{} .", words.join(" "))
}

/// An article set with `n` original sentences; the simplified version
/// copies every other sentence and inserts new ones between them.
pub fn article_set(id: usize, n: usize) -> ArticleSet {
    let original: Vec<String> = (0..n).map(|i| sentence(id * 1000 + i, 12)).collect();
    let mut simplified = Vec::new();
    for (i, s) in original.iter().enumerate() {
        if i % 2 == 0 {
            simplified.push(s.clone());
        } else {
            simplified.push(sentence(id * 1000 + 500 + i, 8));
        }
    }
    let docs = vec![
        Document::from_sentences(format!("b{id}-orig"), GradeLevel::Original, &original).expect("sentences"),
        Document::from_sentences(format!("b{id}-g3"), GradeLevel::Grade(3), &simplified).expect("sentences"),
    ];
    ArticleSet::new(format!("b{id}"), docs).expect("article set")
}

pub fn eval_pairs(n: usize) -> Vec<EvalPair> {
    (0..n)
        .map(|i| EvalPair::from_text(i.to_string(), &sentence(i, 10), &sentence(i + n / 3, 11)))
        .collect()
}

pub fn instances(n: usize) -> Vec<ElaborationInstance> {
    (0..n)
        .map(|i| ElaborationInstance {
            instance_id: format!("b:{i}"),
            set_id: "b".into(),
            sentence_index: i,
            text: sentence(i, 9),
            specificity: SpecificityLevel::from_index(i % 3),
            preceding: (1..=4).map(|k| sentence(i + 7 * k, 10)).collect(),
            following: (1..=2).map(|k| sentence(i + 11 * k, 10)).collect(),
            original_window: vec![sentence(i + 13, 14)],
        })
        .collect()
}

pub fn bigram_lm(sentences: usize) -> BigramLm {
    let corpus: Vec<String> = (0..sentences).map(|i| sentence(i, 10)).collect();
    BigramLm::train(&corpus).expect("bigram model")
}

pub fn generation_context(i: usize) -> GenerationContext {
    let preceding: Vec<String> = (0..4).map(|k| sentence(i + k, 10)).collect();
    GenerationContext {
        instance_id: format!("b:{i}"),
        mode: GenerationMode::C4s,
        text: preceding.join(" "),
        preceding,
        following: Vec::new(),
        original: Vec::new(),
    }
}
