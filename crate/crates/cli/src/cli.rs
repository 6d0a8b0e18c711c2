use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latent_mos::io::DEFAULT_SIGNIFICANT_DIGITS;
use latent_mos::metrics::DEFAULT_MIN_AGREE;
use serde::Serialize;

/// Aggregate opinion ratings into per-sample quality scores, evaluate
/// predictions against them, and simulate rating datasets.
#[derive(Debug, Parser)]
#[command(name = "latent-mos", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one representative value per sample.
    Aggregate(AggregateArgs),
    /// Score predictions with LCC/SRCC or preference precision.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic rating dataset with known latent parameters.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mos,
    Nlow,
    Latent,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mos => "mos",
            Method::Nlow => "nlow",
            Method::Latent => "latent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for latent_mos::io::DatasetFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => Self::Csv,
            Format::Jsonl => Self::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Correlation,
    Ppref,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Weight of the sigma regularizer.
    #[arg(long, default_value_t = 0.03)]
    pub beta: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    /// Strict lower bound on the latent standard deviation.
    #[arg(long, default_value_t = 1e-5)]
    pub sigma_min: f64,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Ratings file (CSV or JSONL).
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Latent)]
    pub method: Method,
    /// Number of lowest ratings averaged by `--method nlow`.
    #[arg(long)]
    pub n_low: Option<usize>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long, default_value_t = 5)]
    pub scale_max: u32,
    /// Input format; guessed from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 0 uses one per core. Output order does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Significant digits of written numbers.
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANT_DIGITS as u64, value_parser = clap::value_parser!(u64).range(1..=17))]
    pub precision: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted scores, `sample_id,score`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference scores for correlation mode, `sample_id,score` (or
    /// aggregation output, read from its `representative` column).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Correlation)]
    pub mode: Mode,
    /// Screened preference pairs, `id_a,id_b,label`.
    #[arg(long, conflicts_with = "annotations")]
    pub pairs: Option<PathBuf>,
    /// Raw preference votes, screened before scoring.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Votes needed for a preference label to survive screening.
    #[arg(long, default_value_t = DEFAULT_MIN_AGREE)]
    pub min_agree: usize,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANT_DIGITS as u64, value_parser = clap::value_parser!(u64).range(1..=17))]
    pub precision: u64,
    /// Also write the JSON report here, with a manifest beside it.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON file with any of mu_star, sigma_star, n_ratings, n_samples,
    /// seed, scale_max. Flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub mu_star: Option<f64>,
    #[arg(long)]
    pub sigma_star: Option<f64>,
    #[arg(long)]
    pub n_ratings: Option<usize>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub scale_max: Option<u32>,
    /// Comma-separated latent means to sweep; replaces --mu-star.
    #[arg(long, value_delimiter = ',')]
    pub grid_mu: Vec<f64>,
    /// Comma-separated latent standard deviations to sweep; replaces --sigma-star.
    #[arg(long, value_delimiter = ',')]
    pub grid_sigma: Vec<f64>,
    /// Dataset format; guessed from the output extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANT_DIGITS as u64, value_parser = clap::value_parser!(u64).range(1..=17))]
    pub precision: u64,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Ground-truth sidecar; defaults to `<output stem>.truth.csv`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}
