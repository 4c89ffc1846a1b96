//! The `advqa` command line: argument parsing, layered settings and the
//! subcommands behind them.

pub mod commands;
pub mod config;
pub mod error;
pub mod specs;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use std::path::PathBuf;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "advqa", version, about = "Adversarial question writing: corpora, models, evaluation and the authoring server")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Random seed (commands that use one).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the summary as one JSON line and errors as single-line JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// JSON settings file; its keys override flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic trigger-word corpus.
    Synth(SynthFlags),
    /// Train a neural classifier.
    Train(TrainFlags),
    /// Build a BM25 index over a corpus's training split.
    Index(IndexFlags),
    /// Accuracy curves, buzz statistics and a transfer table for models × sets.
    Eval(EvalFlags),
    /// Overlap statistics of question sets against a training corpus.
    Analyze(AnalyzeFlags),
    /// Run the authoring HTTP service.
    Serve(ServeFlags),
    /// Check candidate questions against the submission filters.
    Validate(ValidateFlags),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthFlags {
    #[arg(long)]
    pub num_answers: Option<usize>,
    #[arg(long)]
    pub per_answer: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub min_len: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub triggers_per_answer: Option<usize>,
    #[arg(long)]
    pub triggers_per_question: Option<usize>,
    #[arg(long)]
    pub filler_vocab: Option<usize>,
    /// Also write the paraphrased test split here.
    #[arg(long)]
    pub attack_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainFlags {
    /// Corpus JSONL.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// dan, gru or bigru.
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub dropout_keep: Option<f64>,
    /// Word vectors (`word v1 v2 ...` per line).
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Size of random vectors when --vectors is absent.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub vectors_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IndexFlags {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// json or binary.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub stem: Option<bool>,
    #[arg(long)]
    pub remove_stopwords: Option<bool>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalFlags {
    /// `[id=]ir:<index>`, `[id=]neural:<model>:<vectors>` or `[id=]lookup:<jsonl>`; repeatable.
    #[arg(long = "model")]
    pub models: Vec<String>,
    /// `[id=]<jsonl>`; repeatable.
    #[arg(long = "set")]
    pub sets: Vec<String>,
    /// Comma-separated revealed fractions.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    /// word or sentence.
    #[arg(long)]
    pub granularity: Option<String>,
    /// all, train or test.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeFlags {
    /// `[id=]<jsonl>`; repeatable.
    #[arg(long)]
    pub test: Vec<String>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// all, train or test.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeFlags {
    /// Same syntax as `eval --model`; repeatable.
    #[arg(long = "model")]
    pub models: Vec<String>,
    /// Training corpus.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub blocklist_file: Option<PathBuf>,
    #[arg(long)]
    pub min_tokens: Option<usize>,
    #[arg(long)]
    pub max_tokens: Option<usize>,
    #[arg(long)]
    pub dup_threshold: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateFlags {
    /// Training corpus.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Candidate questions JSONL.
    #[arg(long)]
    pub questions: Option<PathBuf>,
    #[arg(long)]
    pub blocklist_file: Option<PathBuf>,
    #[arg(long)]
    pub min_tokens: Option<usize>,
    #[arg(long)]
    pub max_tokens: Option<usize>,
    #[arg(long)]
    pub dup_threshold: Option<f64>,
}

/// Subcommand flags plus the common ones a command understands.
#[derive(Serialize)]
struct WithCommon<'a, F: Serialize> {
    #[serde(flatten)]
    flags: &'a F,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<&'a PathBuf>,
}

fn settings<S, F>(name: &str, flags: &F, common: &CommonArgs, takes_seed: bool) -> Result<S, CliError>
where
    S: Serialize + serde::de::DeserializeOwned + Default,
    F: Serialize,
{
    if common.seed.is_some() && !takes_seed {
        return Err(CliError::Config(format!("`{name}` does not take --seed")));
    }
    let file = common.config.as_deref().map(config::read_config_file).transpose()?;
    let layered = WithCommon {
        flags,
        seed: common.seed,
        out: common.out.as_ref(),
    };
    let s: S = config::resolve(name, &layered, file)?;
    log::info!("resolved config: {}", config::describe(name, &s)?);
    Ok(s)
}

/// Runs one parsed invocation and returns its summary.
pub fn run(cli: &Cli) -> Result<Value, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Synth(f) => commands::synth(&settings("synth", f, c, true)?),
        Command::Train(f) => commands::train(&settings("train", f, c, true)?),
        Command::Index(f) => commands::index(&settings("index", f, c, false)?),
        Command::Eval(f) => commands::eval(&settings("eval", f, c, false)?),
        Command::Analyze(f) => commands::analyze(&settings("analyze", f, c, false)?),
        Command::Serve(f) => commands::serve(&settings("serve", f, c, false)?),
        Command::Validate(f) => commands::validate(&settings("validate", f, c, false)?),
    }
}
