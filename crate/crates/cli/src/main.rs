//! `compnli`: generate the Comparisons dataset, measure lexical biases in NLI
//! corpora, and train or evaluate averaged-embedding baselines.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "compnli", version, about = "Comparisons NLI toolkit")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Worker threads for the corpus diagnostics.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Rendering of the report printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Tsv,
    Human,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write the Comparisons corpora, one file per pair type, plus splits.
    Generate(GenerateArgs),
    /// Corpus bias statistics.
    Stats(StatsArgs),
    /// Tokens whose occurrence rate differs between two corpora.
    VocabDiff(VocabDiffArgs),
    /// Train a classifier.
    Train(TrainArgs),
    /// Accuracy and confusion matrices of a trained classifier.
    Eval(EvalArgs),
    /// Concatenate two corpora and shuffle.
    Mix(MixArgs),
    /// Continue training a classifier on a new corpus.
    Finetune(FinetuneArgs),
    /// Two-proportion z-test.
    Sigtest(SigtestArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// Subject pool, one phrase per line. Defaults to the built-in pool.
    #[arg(long)]
    pub subjects: Option<PathBuf>,
    /// Adjective pool, one phrase per line. Defaults to the built-in pool.
    #[arg(long)]
    pub adjectives: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec!["same".to_string(), "more_less".to_string(), "not".to_string()])]
    pub types: Vec<String>,
    /// Train, validation and test sizes drawn from all generated types.
    #[arg(long, value_delimiter = ',', default_values_t = vec![40_000usize, 2_000, 2_000])]
    pub split: Vec<usize>,
    /// Skip writing splits.
    #[arg(long)]
    pub no_split: bool,
    #[arg(long, value_enum, default_value_t = FileFormat::Jsonl)]
    pub corpus_format: FileFormat,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    Jsonl,
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsKind {
    Overlap,
    Antonym,
    Negation,
    VocabDiff,
}

#[derive(Args, Debug, Serialize)]
pub struct StatsArgs {
    #[arg(value_enum)]
    pub kind: StatsKind,
    /// Corpus to analyse. Defaults to the SNLI training file in $COMPNLI_DATA_DIR.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Sizes of the overlap-ranked prefixes to report.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1000usize, 10000])]
    pub top: Vec<usize>,
    /// Restrict the corpus first, e.g. `top:10000` for the highest-overlap pairs.
    #[arg(long)]
    pub subset: Option<String>,
    #[arg(long, default_value = "jaccard")]
    pub measure: String,
    /// Synonym/antonym file. Defaults to thesaurus.jsonl in $COMPNLI_DATA_DIR.
    #[arg(long)]
    pub thesaurus: Option<PathBuf>,
    /// Reference corpus for `vocab-diff`.
    #[arg(long)]
    pub against: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct VocabDiffArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    /// Output TSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize, Default)]
pub struct HyperArgs {
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long, value_parser = ["four-block", "concat"])]
    pub combiner: Option<String>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub shrink: Option<f64>,
    #[arg(long)]
    pub min_learning_rate: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub max_grad_norm: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Defaults to the SNLI training file in $COMPNLI_DATA_DIR.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Defaults to the SNLI dev file in $COMPNLI_DATA_DIR.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Word vectors. Defaults to the first glove*.txt in $COMPNLI_DATA_DIR.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, value_parser = ["bow", "half_split"], default_value = "bow")]
    pub encoder: String,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Model file to write; the training log goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Defaults to the SNLI test file in $COMPNLI_DATA_DIR.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct MixArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Output corpus; `.tsv` selects TSV, anything else SNLI JSONL.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct FinetuneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    /// Corpora evaluated after every epoch, e.g. the original test set.
    #[arg(long)]
    pub held_out: Vec<PathBuf>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SigtestArgs {
    /// Predictions TSV written by `eval`.
    #[arg(long, conflicts_with = "counts", required_unless_present = "counts")]
    pub predictions: Option<PathBuf>,
    /// Only rows of this pair type.
    #[arg(long, requires = "predictions")]
    pub pair_type: Option<String>,
    /// Predicted label whose rate is compared between gold contradictions
    /// and gold entailments.
    #[arg(long, default_value = "entailment")]
    pub predicted: String,
    /// Raw counts `successes_a,n_a,successes_b,n_b`.
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<u64>>,
    /// Output TSV file.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
