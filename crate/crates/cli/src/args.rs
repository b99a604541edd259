use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "sgp",
    version,
    about = "Stirling-gamma priors, random partitions and Gibbs samplers"
)]
pub struct Cli {
    /// Directory receiving all output files.
    #[arg(long, global = true, env = "SGP_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// The Stirling-gamma distribution.
    #[command(subcommand)]
    Sg(SgCommand),
    /// Random partitions and cluster-count laws.
    #[command(subcommand)]
    Partition(PartitionCommand),
    /// Synthetic data sets.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Dirichlet-process Gaussian mixture with a Stirling-gamma or fixed precision.
    FitMixture(FitMixtureArgs),
    /// Multi-network stochastic block model.
    FitSbm(FitSbmArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SgParams {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub m: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SgCommand {
    /// Density on a grid, written to pdf.csv.
    Pdf(PdfArgs),
    /// Exact draws, written to samples.csv.
    Sample(SgSampleArgs),
    /// E(α) and E(α²).
    Moments(SgParamsOnly),
    /// Prior with a given expected number of clusters.
    Elicit(ElicitArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SgParamsOnly {
    #[command(flatten)]
    pub params: SgParams,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PdfArgs {
    #[command(flatten)]
    pub params: SgParams,
    /// Right end of the grid; by default the point with survival 1e-12.
    #[arg(long)]
    pub upper: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SgSampleArgs {
    #[command(flatten)]
    pub params: SgParams,
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ElicitArgs {
    /// Expected number of clusters E(K_n).
    #[arg(long)]
    pub ek: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub n: u64,
}

/// Either a fixed DP precision or Stirling-gamma parameters.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PartitionPrior {
    /// Dirichlet process with fixed precision --alpha.
    #[arg(long, requires = "alpha", conflicts_with_all = ["a", "b", "m"])]
    pub dp: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, required_unless_present = "dp", requires_all = ["b", "m"])]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionCommand {
    /// Exact pmf of the number of clusters, written to kn_pmf.csv.
    KnPmf(KnPmfArgs),
    /// Partitions from the urn scheme, written to partitions.csv.
    Sample(PartitionSampleArgs),
    /// Distance of K_m to its negative-binomial and Poisson limits.
    Limits(LimitsArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct KnPmfArgs {
    #[command(flatten)]
    pub prior: PartitionPrior,
    #[arg(long)]
    pub n: usize,
    /// Largest n for the Stirling-number table.
    #[arg(long, default_value_t = 10_000)]
    pub stirling_cap: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PartitionSampleArgs {
    #[command(flatten)]
    pub prior: PartitionPrior,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LimitsArgs {
    #[command(flatten)]
    pub params: SgParams,
    /// λ in the DP precision λ / log m.
    #[arg(long, default_value_t = 3.0)]
    pub lambda: f64,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulateCommand {
    /// Four-component bivariate Gaussian mixture, written to data.csv.
    Mixture(SimulateArgs),
    /// Six networks on a shared block structure.
    Networks(SimulateArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ChainArgs {
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent chains run concurrently.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Also write every retained partition.
    #[arg(long)]
    pub store_partitions: bool,
    /// Truncation rule of the effective-sample-size estimator.
    #[arg(long, value_enum, default_value = "initial-monotone")]
    #[serde(default)]
    pub ess: EssChoice,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EssChoice {
    #[default]
    InitialMonotone,
    InitialPositive,
}

impl From<EssChoice> for stirling_gamma::diagnostics::EssMethod {
    fn from(c: EssChoice) -> Self {
        match c {
            EssChoice::InitialMonotone => Self::InitialMonotone,
            EssChoice::InitialPositive => Self::InitialPositive,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FitMixtureArgs {
    /// CSV with one observation per row.
    #[arg(long)]
    pub data: PathBuf,
    /// fixed:<alpha> or sg:<a>,<b>[,<m>] with m equal to the sample size.
    #[arg(long)]
    pub prior: String,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 0.01)]
    pub kappa0: f64,
    /// Defaults to the dimension plus two.
    #[arg(long)]
    pub nu0: Option<f64>,
    /// Multiple of the identity used as the inverse-Wishart scale.
    #[arg(long, default_value_t = 1.0)]
    pub scale0: f64,
    /// Comma-separated prior mean; zero by default.
    #[arg(long)]
    pub mean0: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FitSbmArgs {
    /// Adjacency matrix or edge list; repeat once per network.
    #[arg(long = "network", required = true)]
    pub networks: Vec<PathBuf>,
    /// Number of nodes, needed for edge lists with isolated trailing nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// fixed:<alpha>, independent:<a>,<b>[,<m>] or pooled:<a>,<b>[,<m>].
    #[arg(long)]
    pub prior: String,
    /// True partition, for adjusted Rand indices.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub chain: ChainArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
