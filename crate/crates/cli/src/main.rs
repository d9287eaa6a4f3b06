//! `capeval`: score captions, correlate metrics with human judgments,
//! test significance, fuse metrics and draw word clouds.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "capeval", version, about = "Caption metric meta-evaluation workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Write a synthetic corpus (captions, references, assessments).
    Synth(SynthArgs),
    /// Score every caption with the selected metrics.
    Score(ScoreArgs),
    /// Per-year metric/human correlations at system and caption level.
    Correlate(CorrelateArgs),
    /// Pairwise Williams significance matrices.
    Williams(WilliamsArgs),
    /// Fit a linear fusion of metrics on an 80/20 per-year split.
    Fuse(FuseArgs),
    /// Correlations before and after shuffling candidate words.
    Shuffle(ShuffleArgs),
    /// Word frequencies and clouds of the top-scoring pairs.
    Wordcloud(WordcloudArgs),
    /// Write every (candidate, reference) pair for an external scorer.
    ExportPairs(ExportArgs),
    /// Validate a scores file produced by an external scorer.
    ImportScores(ImportArgs),
    /// Train the feature-based baseline scorer.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sa,
    Ma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    System,
    Caption,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Candidate,
    Reference,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusArgs {
    #[arg(long)]
    pub captions: PathBuf,
    #[arg(long)]
    pub references: PathBuf,
    /// Restrict the run to one year label.
    #[arg(long)]
    pub year: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct HumanArgs {
    #[arg(long)]
    pub assessments: PathBuf,
    /// Assessment set: one annotation per caption (sa) or many (ma).
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Accept MA captions with fewer than the minimum annotation count.
    #[arg(long)]
    pub relax_min_annotations: bool,
    /// Minimum mean score on human control items.
    #[arg(long, default_value_t = capeval_core::corpus::DEFAULT_HUMAN_FLOOR)]
    pub human_floor: f64,
    /// Maximum mean score on degraded control items.
    #[arg(long, default_value_t = capeval_core::corpus::DEFAULT_DEGRADED_CEILING)]
    pub degraded_ceiling: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreSource {
    /// Score files; when absent, the metrics are computed on the fly.
    #[arg(long = "scores")]
    pub scores: Vec<PathBuf>,
    /// Comma-separated metric names, or `all`.
    #[arg(long, default_value = "all")]
    pub metrics: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub videos: usize,
    #[arg(long, default_value_t = 5)]
    pub systems: usize,
    #[arg(long, default_value_t = 5)]
    pub refs: usize,
    #[arg(long, default_value_t = 5)]
    pub years: usize,
    #[arg(long, default_value_t = 0.8)]
    pub quality_spread: f64,
    #[arg(long, default_value_t = 10)]
    pub annotators: usize,
    #[arg(long, default_value_t = 1)]
    pub annotations_per_item: usize,
    #[arg(long, default_value_t = 0)]
    pub bad_annotators: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Comma-separated metric names, or `all`.
    #[arg(long, default_value = "all")]
    pub metrics: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub human: HumanArgs,
    #[command(flatten)]
    pub source: ScoreSource,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub level: LevelArg,
    /// Also report each reference separately (caption level).
    #[arg(long)]
    pub per_reference: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct WilliamsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub human: HumanArgs,
    #[command(flatten)]
    pub source: ScoreSource,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, value_enum, default_value = "system")]
    pub level: LevelArg,
}

#[derive(Debug, Args, Serialize)]
pub struct FuseArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub human: HumanArgs,
    #[command(flatten)]
    pub source: ScoreSource,
    #[command(flatten)]
    pub out: OutArgs,
    /// Human assessment set to regress against.
    #[arg(long, value_enum)]
    pub target: Mode,
    /// Seed of the train/test split.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ShuffleArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub human: HumanArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Comma-separated metric names, or `all`.
    #[arg(long, default_value = "all")]
    pub metrics: String,
    /// Trained baseline model to include.
    #[arg(long)]
    pub baseline_model: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct WordcloudArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub source: ScoreSource,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = capeval_core::qualitative::DEFAULT_TOP_K)]
    pub top_k: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    /// Stop-word list, one word per line; the built-in English list by default.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Attach standardized human targets from this file.
    #[arg(long)]
    pub assessments: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub relax_min_annotations: bool,
    /// Year whose pairs get null targets, as do training captions sharing
    /// text with it.
    #[arg(long)]
    pub held_out_year: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ImportArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// File to validate.
    #[arg(long = "scores")]
    pub scores: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub human: HumanArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = capeval_core::learned::DEFAULT_RIDGE_LAMBDA)]
    pub lambda: f64,
    /// Train on every other year and evaluate on this one.
    #[arg(long)]
    pub held_out_year: Option<String>,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CAPEVAL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("CAPEVAL_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("CAPEVAL_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
