use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Batch analytics for conversation cascades.
#[derive(Debug, Parser)]
#[command(name = "cascadekit", version, about, propagate_version = true)]
pub struct Cli {
    /// JSON parameter file (or a previous run manifest). Defaults to the file
    /// named by CASCADEKIT_CONFIG; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a post corpus.
    Ingest(IngestArgs),
    /// Build cascade trees and per-type statistics.
    #[command(subcommand)]
    Cascades(CascadesCommand),
    /// Response rates and type evolutions.
    #[command(subcommand)]
    Dynamics(DynamicsCommand),
    /// Topic labeling over the hashtag graph.
    #[command(subcommand)]
    Topics(TopicsCommand),
    /// Fit SI and Bass growth models to evolution timeseries.
    Fit(FitArgs),
    /// Emit plot-ready CSV tables from stage outputs.
    Report(ReportArgs),
}

/// Corpus filters shared by every command that reads raw posts.
#[derive(Debug, Args, Default, Clone)]
pub struct FilterArgs {
    /// Keep posts at or after this epoch second.
    #[arg(long)]
    pub from: Option<i64>,
    /// Keep posts at or before this epoch second.
    #[arg(long)]
    pub to: Option<i64>,
    /// Comma-separated kinds to keep (post, reply, quote).
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Corpus statistics as JSON.
    #[arg(long)]
    pub stats_out: PathBuf,
    /// Accepted posts re-serialized in the canonical schema.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Subcommand)]
pub enum CascadesCommand {
    /// Assemble posts into reply trees.
    Build(BuildArgs),
    /// Per-type depth, volume, user and virality statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Missing-parent and quarantined posts as JSON.
    #[arg(long)]
    pub orphans_out: Option<PathBuf>,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum DynamicsCommand {
    /// Mean reply delay per cascade type and depth.
    ResponseRates(ResponseRatesArgs),
    /// Type transitions during replay, with statistics and timeseries.
    Evolutions(EvolutionsArgs),
}

#[derive(Debug, Args)]
pub struct ResponseRatesArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvolutionsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub events_out: PathBuf,
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
    #[arg(long)]
    pub timeseries_out: Option<PathBuf>,
    /// Timeseries bin width in seconds.
    #[arg(long = "bin")]
    pub bin_width: Option<i64>,
    /// Divide each transition's bins by its total.
    #[arg(long)]
    pub normalize: bool,
    /// Keep S->A in the statistics.
    #[arg(long)]
    pub include_bootstrap: bool,
}

#[derive(Debug, Subcommand)]
pub enum TopicsCommand {
    /// Hashtag co-occurrence graph.
    Graph(GraphArgs),
    /// Propagate seed topics over the hashtag graph.
    Label(LabelArgs),
    /// Assign topics to cascades by labeled-hashtag counts.
    Assign(AssignArgs),
    /// Score labels against held-out truth.
    Eval(EvalArgs),
    /// Reply tie strength, overall and per topic.
    Tiestrength(TieArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Withhold this many seed hashtags for evaluation.
    #[arg(long)]
    pub holdout: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Where the withheld hashtags and their labels go.
    #[arg(long, requires = "holdout")]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    #[arg(long)]
    pub cascades: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub labels: PathBuf,
    /// JSON object mapping hashtag to its true topics.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TieArgs {
    #[arg(long)]
    pub cascades: PathBuf,
    /// Cascade topics CSV from `topics assign`.
    #[arg(long)]
    pub topics: PathBuf,
    /// Per-topic mean tie strength.
    #[arg(long)]
    pub out: PathBuf,
    /// Every user pair with its count.
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub timeseries: PathBuf,
    /// Transition to fit, e.g. A-C. Fits every transition when omitted.
    #[arg(long)]
    pub transition: Option<String>,
    /// si, bass or both.
    #[arg(long)]
    pub model: Option<String>,
    /// Bin width of the timeseries in seconds; gaps are filled with zeros.
    #[arg(long = "bin")]
    pub bin_width: Option<i64>,
    /// Use the bin index as Bass time (the default).
    #[arg(long, conflicts_with = "time_scale")]
    pub bin_index_time: bool,
    /// Bass time units per bin.
    #[arg(long)]
    pub time_scale: Option<f64>,
    /// Fit each series divided by its total.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Cascade cache; gives type counts and depth/volume distributions.
    #[arg(long)]
    pub cascades: Option<PathBuf>,
    /// Response-rate CSV from `dynamics response-rates`.
    #[arg(long)]
    pub rates: Option<PathBuf>,
    /// Evolution events from `dynamics evolutions`.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Fit results from `fit`.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Bin width for the evolution timeseries table.
    #[arg(long = "bin")]
    pub bin_width: Option<i64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}
