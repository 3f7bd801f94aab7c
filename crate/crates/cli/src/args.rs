use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use elabsimp_core::generation::{FinetuneRegime, GenerationMode, Selection, Strategy};
use elabsimp_core::specificity::VariantKind;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "elabsimp", version, about = "Elaboration extraction, specificity modeling and generation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align article sets and write unaligned simplified sentences as candidates.
    Extract(ExtractArgs),
    /// Aggregate raw annotations into one label per candidate.
    Aggregate(AggregateArgs),
    /// Partition verified labels into train/valid/test instance files.
    Splits(SplitsArgs),
    /// Train a contextual-specificity classifier.
    #[command(name = "train-spec")]
    TrainSpec(TrainSpecArgs),
    /// Evaluate the classifier over several seeded runs.
    #[command(name = "eval-spec")]
    EvalSpec(EvalSpecArgs),
    /// Finetune a language model under a named regime.
    Finetune(FinetuneArgs),
    /// Generate elaborations for test instances.
    Generate(GenerateArgs),
    /// Score generations with BLEU and tally human evaluation.
    Evaluate(EvaluateArgs),
    /// Summarize corpus, annotation and split statistics.
    Stats(StatsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Extract(_) => "extract",
            Command::Aggregate(_) => "aggregate",
            Command::Splits(_) => "splits",
            Command::TrainSpec(_) => "train-spec",
            Command::EvalSpec(_) => "eval-spec",
            Command::Finetune(_) => "finetune",
            Command::Generate(_) => "generate",
            Command::Evaluate(_) => "evaluate",
            Command::Stats(_) => "stats",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Extract(a) => &a.common,
            Command::Aggregate(a) => &a.common,
            Command::Splits(a) => &a.common,
            Command::TrainSpec(a) => &a.common,
            Command::EvalSpec(a) => &a.common,
            Command::Finetune(a) => &a.common,
            Command::Generate(a) => &a.common,
            Command::Evaluate(a) => &a.common,
            Command::Stats(a) => &a.common,
        }
    }

    /// Layers the flags given on the command line over `config`.
    pub fn apply(&self, config: &mut RunConfig) {
        let common = self.common();
        set(&mut config.out, common.out.clone().map(Some));
        set(&mut config.jobs, common.jobs);
        match self {
            Command::Extract(a) => {
                set(&mut config.corpus.dir, a.corpus.clone().map(Some));
                set(&mut config.alignment.threshold, a.threshold);
                set(&mut config.alignment.radius, a.radius);
                set(&mut config.alignment.backend, a.backend.clone());
                set(&mut config.alignment.dim, a.dim);
                set(&mut config.alignment.seed, a.seed);
            }
            Command::Aggregate(a) => {
                set(&mut config.annotation.annotations, a.annotations.clone().map(Some));
            }
            Command::Splits(a) => {
                set(&mut config.annotation.labels, a.labels.clone().map(Some));
                set(&mut config.annotation.expert_ids, a.expert_ids.clone().map(Some));
                set(&mut config.annotation.valid_ids, a.valid_ids.clone().map(Some));
                set(&mut config.annotation.candidates, a.candidates.clone().map(Some));
                set(&mut config.corpus.dir, a.corpus.clone().map(Some));
            }
            Command::TrainSpec(a) => {
                a.data.apply(config);
                a.classifier.apply(config);
            }
            Command::EvalSpec(a) => {
                a.data.apply(config);
                a.classifier.apply(config);
                set(&mut config.specificity.runs, a.runs);
                set(&mut config.specificity.model, a.model.clone().map(Some));
                if a.ablation {
                    config.specificity.ablation = true;
                }
            }
            Command::Finetune(a) => {
                a.data.apply(config);
                set(&mut config.generation.lm, a.lm.clone().map(Some));
                set(&mut config.generation.finetune, a.regime);
                set(&mut config.corpus.dir, a.corpus.clone().map(Some));
                set(&mut config.generation.mode, a.mode);
            }
            Command::Generate(a) => {
                set(&mut config.data.test, a.test.clone().map(Some));
                set(&mut config.generation.lm, a.lm.clone().map(Some));
                set(&mut config.specificity.model, a.model.clone().map(Some));
                set(&mut config.generation.mode, a.mode);
                let g = &mut config.generation;
                set(&mut g.strategy, a.strategy);
                set(&mut g.top_k, a.top_k);
                set(&mut g.temperature, a.temperature.map(Some));
                set(&mut g.max_attempts, a.max_attempts);
                set(&mut g.max_tokens, a.max_tokens);
                set(&mut g.selection, a.selection);
                set(&mut g.seed, a.seed);
            }
            Command::Evaluate(a) => {
                set(&mut config.evaluation.pairs, a.pairs.clone().map(Some));
                set(&mut config.generation.generations, a.generations.clone().map(Some));
                set(&mut config.data.test, a.test.clone().map(Some));
                set(&mut config.evaluation.human_eval, a.human_eval.clone().map(Some));
                if !a.orders.is_empty() {
                    config.evaluation.orders = a.orders.clone();
                }
            }
            Command::Stats(a) => {
                set(&mut config.corpus.dir, a.corpus.clone().map(Some));
                set(&mut config.annotation.candidates, a.candidates.clone().map(Some));
                set(&mut config.annotation.labels, a.labels.clone().map(Some));
                set(&mut config.annotation.expert_ids, a.expert_ids.clone().map(Some));
                set(&mut config.annotation.valid_ids, a.valid_ids.clone().map(Some));
                set(
                    &mut config.evaluation.sentence_specificity,
                    a.sentence_specificity.clone().map(Some),
                );
            }
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Mirror debug-level log lines to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory of article-set JSONL files.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Simplified neighbours per side whose aligned originals form the original window.
    #[arg(long)]
    pub radius: Option<usize>,
    /// `hash`, `vectors:<path>` or an http(s) embedding endpoint.
    #[arg(long)]
    pub backend: Option<String>,
    /// Embedding dimension (hash backend) or expected dimension (remote).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Hash embedder seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Raw annotation records (JSONL).
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SplitsArgs {
    /// Aggregated labels (JSONL).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Candidate ids of the expert-annotated test split, one per line.
    #[arg(long)]
    pub expert_ids: Option<PathBuf>,
    /// Candidate ids of the validation split, one per line.
    #[arg(long)]
    pub valid_ids: Option<PathBuf>,
    /// Candidate elaborations (JSONL).
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
}

impl DataArgs {
    fn apply(&self, config: &mut RunConfig) {
        set(&mut config.data.train, self.train.clone().map(Some));
        set(&mut config.data.valid, self.valid.clone().map(Some));
        set(&mut config.data.test, self.test.clone().map(Some));
    }
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    /// Context variant, e.g. `E`, `Cs+E`, `Co+Cs+E`.
    #[arg(long)]
    pub variant: Option<VariantKind>,
    /// Preceding simplified sentences (2, 4 or 6).
    #[arg(long)]
    pub context_k: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ClassifierArgs {
    fn apply(&self, config: &mut RunConfig) {
        let s = &mut config.specificity;
        set(&mut s.variant, self.variant);
        set(&mut s.context_k, self.context_k);
        set(&mut s.training.epochs, self.epochs);
        set(&mut s.training.batch_size, self.batch);
        set(&mut s.training.learning_rate, self.lr);
        set(&mut s.training.seed, self.seed);
    }
}

#[derive(Debug, Args)]
pub struct TrainSpecArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvalSpecArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// Number of seeded training runs.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Evaluate this trained model on the test split instead of retraining.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Sweep the context length over 2, 4 and 6.
    #[arg(long)]
    pub ablation: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FinetuneArgs {
    /// Base language model; an empty bigram model when absent.
    #[arg(long)]
    pub lm: Option<PathBuf>,
    /// `none`, `simplified_documents` or `elaboration_corpus`.
    #[arg(long)]
    pub regime: Option<FinetuneRegime>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Context mode for the elaboration corpus.
    #[arg(long)]
    pub mode: Option<GenerationMode>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Saved language model.
    #[arg(long)]
    pub lm: Option<PathBuf>,
    /// Test instances (JSONL).
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Trained specificity model directory (contextual strategy).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// C2s, C2s+Co, C4s, C2s±, C4s± (`+-` may replace `±`).
    #[arg(long)]
    pub mode: Option<GenerationMode>,
    /// greedy, top_k or contextual.
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_attempts: Option<usize>,
    #[arg(long)]
    pub max_tokens: Option<usize>,
    /// first_match or best_log_prob.
    #[arg(long)]
    pub selection: Option<Selection>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Candidate/reference pairs (JSONL).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Generation records to pair with `--test` references.
    #[arg(long)]
    pub generations: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Human evaluation records (JSONL).
    #[arg(long)]
    pub human_eval: Option<PathBuf>,
    /// BLEU orders to report, e.g. `--orders 1,2`.
    #[arg(long, value_delimiter = ',')]
    pub orders: Vec<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub expert_ids: Option<PathBuf>,
    #[arg(long)]
    pub valid_ids: Option<PathBuf>,
    /// JSON object mapping candidate ids to sentence-specificity scores.
    #[arg(long)]
    pub sentence_specificity: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}
