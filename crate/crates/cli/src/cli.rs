//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lfa_core::metrics::CiMethod;

#[derive(Debug, Parser)]
#[command(
    name = "lfa",
    version,
    about = "Discover and audit coherent subpopulations in embedding datasets"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for randomized steps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap; results are identical for any value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dataset directory and optional attribute or group files.
    Validate(ValidateArgs),
    /// Generate a synthetic dataset from the `[synth]` config section.
    Synth,
    /// Seed groups from connected components of the similarity graph.
    InitGroups(InitArgs),
    /// Grow seed groups by latent feature alignment.
    LfaRun(LfaArgs),
    /// Size-matched comparison groups.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Attribute coherence of one or more group files.
    Coherence(CoherenceArgs),
    /// Error rates, bootstrap intervals and FMR curves per group.
    BiasReport(BiasArgs),
    /// Merge annotator label files by strict majority.
    Consensus(ConsensusArgs),
    /// Move embeddings along a latent direction by spherical interpolation.
    Traverse(TraverseArgs),
    /// Find the k-means `k` or LFA `tau` giving a target mean group size.
    MatchSize(MatchArgs),
}

#[derive(Debug, Args)]
pub struct DatasetArg {
    /// Dataset directory holding `embeddings.lfae` and `ids.csv`.
    #[arg(long, value_name = "DIR")]
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    /// Attribute CSV to check against the dataset.
    #[arg(long, value_name = "CSV")]
    pub attributes: Option<PathBuf>,
    /// Group CSVs to check against the dataset.
    #[arg(long, value_name = "CSV")]
    pub groups: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InitArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    #[arg(long)]
    pub graph_threshold: Option<f64>,
    #[arg(long)]
    pub min_size: Option<usize>,
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long)]
    pub min_identities: Option<usize>,
    #[arg(long)]
    pub max_seeds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LfaArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    /// Seed groups (group CSV).
    #[arg(long, value_name = "CSV")]
    pub seeds: PathBuf,
    #[arg(long, conflicts_with = "target_size")]
    pub tau: Option<f64>,
    /// Search for the `tau` whose mean grown size is near this.
    #[arg(long)]
    pub target_size: Option<usize>,
    #[arg(long)]
    pub max_members: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum BaselineCommand {
    /// Lloyd's k-means with k-means++ seeding.
    Kmeans(KmeansArgs),
    /// The n nearest neighbors of each seed's first member.
    Nns(NnsArgs),
}

#[derive(Debug, Args)]
pub struct KmeansArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    #[arg(long, conflicts_with = "target_size")]
    pub k: Option<usize>,
    /// Derive `k` from a target mean cluster size.
    #[arg(long)]
    pub target_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct NnsArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    /// Seed groups; each contributes its first member.
    #[arg(long, value_name = "CSV")]
    pub seeds: PathBuf,
    #[arg(long, conflicts_with = "target_size")]
    pub n: Option<usize>,
    #[arg(long)]
    pub target_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    /// Attribute CSV (a consensus CSV works too).
    #[arg(long, value_name = "CSV")]
    pub attributes: PathBuf,
    /// Group CSV, optionally labelled as `NAME=PATH`. Repeatable.
    #[arg(long, value_name = "[NAME=]CSV", required = true)]
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CiArg {
    Normal,
    Percentile,
}

impl From<CiArg> for CiMethod {
    fn from(c: CiArg) -> Self {
        match c {
            CiArg::Normal => CiMethod::Normal,
            CiArg::Percentile => CiMethod::Percentile,
        }
    }
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    /// Groups to compare (group CSV).
    #[arg(long, value_name = "CSV")]
    pub groups: PathBuf,
    /// Group ids reported but left out of the cross-group spread.
    #[arg(long, value_name = "ID")]
    pub exclude: Vec<String>,
    /// Add a random reference group for FMR ratios.
    #[arg(long)]
    pub random_reference: bool,
    #[arg(long)]
    pub fixed_threshold: Option<f64>,
    /// Bootstrap iterations (0 disables).
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, value_enum)]
    pub ci: Option<CiArg>,
    /// FMR targets for FNMR@FMR, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fmr_targets: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ConsensusArgs {
    /// Annotator JSON files, at least two.
    #[arg(long = "annotator", value_name = "JSON", required = true, num_args = 1..)]
    pub annotators: Vec<PathBuf>,
    /// Attribute schema JSON; defaults to the ten face attributes.
    #[arg(long, value_name = "JSON")]
    pub schema: Option<PathBuf>,
    /// Keep only images every annotator labelled instead of failing.
    #[arg(long)]
    pub intersect: bool,
}

#[derive(Debug, Args)]
pub struct TraverseArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    /// Direction manifest written by `lfa-run`.
    #[arg(long, value_name = "JSON")]
    pub directions: PathBuf,
    /// Direction id within the manifest.
    #[arg(long, value_name = "ID")]
    pub direction: String,
    /// Image ids to move. Repeatable.
    #[arg(long = "target", value_name = "IMAGE_ID")]
    pub targets: Vec<String>,
    /// Use every member of these groups as targets.
    #[arg(long, value_name = "CSV")]
    pub target_groups: Option<PathBuf>,
    /// Interpolation strengths, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub strengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Kmeans,
    Lfa,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[command(flatten)]
    pub data: DatasetArg,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub target_size: usize,
    /// Seed groups, required for `--mode lfa`.
    #[arg(long, value_name = "CSV")]
    pub seeds: Option<PathBuf>,
}
