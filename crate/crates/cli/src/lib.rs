//! Command-line front end: flat `key=value` configuration and one
//! subcommand per pipeline stage.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::dispatch;
pub use config::{parse_config, Config};

#[derive(Debug, Parser)]
#[command(name = "ftsum", about = "Fact-aware sentence summarization")]
pub struct Cli {
    /// key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress progress output on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fact descriptions from CoNLL-U parses and optional relation triples.
    ExtractFacts(ExtractArgs),
    /// Length, fact-count and copy-ratio statistics as JSON.
    Stats(CorpusArgs),
    /// Source and target vocabularies from a training corpus.
    BuildVocab(BuildVocabArgs),
    Train(TrainArgs),
    /// Beam-search summaries, one per input line.
    Decode(DecodeArgs),
    /// ROUGE, perplexity and faithfulness tallies as JSON.
    Evaluate(EvaluateArgs),
    /// Teacher-forced context gate statistics as JSON.
    GateReport(GateArgs),
    /// Finite-difference check of the tiny concat and gated models.
    Gradcheck,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub conllu: PathBuf,
    /// JSON-lines triples keyed by 0-based sentence index.
    #[arg(long)]
    pub triples: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_reporting_filter: bool,
    /// Comma-separated dependency labels.
    #[arg(long)]
    pub labels: Option<String>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// source<TAB>target lines.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Aligned fact lines.
    #[arg(long)]
    pub facts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildVocabArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long)]
    pub source_out: PathBuf,
    #[arg(long)]
    pub target_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub train_facts: Option<PathBuf>,
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub dev_facts: Option<PathBuf>,
    #[arg(long)]
    pub source_vocab: Option<PathBuf>,
    #[arg(long)]
    pub target_vocab: Option<PathBuf>,
    /// Pretrained word vectors, one `token v_1 .. v_d` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON-lines validation log to write.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// One tokenized sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub facts: Option<PathBuf>,
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Writes per-step mean gate values as JSON lines.
    #[arg(long)]
    pub gate_trace: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// System summaries, one per line.
    #[arg(long, requires = "references")]
    pub candidates: Option<PathBuf>,
    #[arg(long, requires = "candidates")]
    pub references: Option<PathBuf>,
    /// Faithfulness annotations: system_id, example_id, label (TSV).
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Scores perplexity of this checkpoint on --corpus.
    #[arg(long, requires = "corpus")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub facts: Option<PathBuf>,
    #[arg(long)]
    pub stem: bool,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Training log whose gate trajectory is included.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    let result = parse_config(cli.config.as_deref(), &overrides).and_then(|cfg| dispatch(cli.command, cfg, cli.quiet));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
