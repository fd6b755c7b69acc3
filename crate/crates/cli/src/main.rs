//! `rootstat` command line: rooted subgraph census, overlap algebra, random
//! graph simulation and moments, block fitting, goodness-of-fit testing,
//! regression on rooted densities, and Monte Carlo validation presets.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rootstat", version, about = "Rooted subgraph densities and vertex-level network inference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct Common {
    /// Seed for every random stream; a fresh one is generated and printed when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output path; JSON reports and tables go to standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-vertex rooted counts and densities as a tab-separated table.
    Census(CensusArgs),
    /// Overlap set and coefficients of two motifs.
    Overlap(OverlapArgs),
    /// Check the product identity at every vertex of a graph.
    VerifyIdentity(IdentityArgs),
    /// Sample a graph from a block kernel and write its edge list.
    Simulate(SimulateArgs),
    /// Exact moments of rooted counts under a block kernel.
    Moments(MomentsArgs),
    /// Fit a block kernel with Louvain and an information criterion.
    Fit(GraphArgs),
    /// Vertex-level goodness-of-fit test of a fitted block kernel.
    Gof(GofArgs),
    /// Logistic regression of vertex labels on rooted densities.
    Regress(RegressArgs),
    /// Monte Carlo validation presets.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct GraphArgs {
    /// Whitespace-separated edge list, one edge per line.
    #[arg(long)]
    pub graph: std::path::PathBuf,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct CensusArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Comma-separated motif names.
    #[arg(long, default_value = "triangle,square", value_delimiter = ',')]
    pub motifs: Vec<String>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct OverlapArgs {
    /// Exactly two motif names, comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub motifs: Vec<String>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct IdentityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub motifs: Vec<String>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct KernelArg {
    /// Kernel JSON (`B` flat or nested, optional `k` and `pi`); the bundled
    /// 3-block kernel when absent.
    #[arg(long)]
    pub kernel: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    #[arg(long)]
    pub n: usize,
    /// Sparsity; defaults to `n^(-1/3)`.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_enum, default_value_t = Latents::Uniform)]
    pub latent: Latents,
}

#[derive(ValueEnum, Debug, Clone, Copy, serde::Serialize)]
pub enum Latents {
    Uniform,
    Grid,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub kernel: KernelArg,
    #[arg(long, default_value = "triangle,square", value_delimiter = ',')]
    pub motifs: Vec<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Block of the root vertex.
    #[arg(long, default_value_t = 0)]
    pub block: usize,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct GofArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value = "triangle,square", value_delimiter = ',')]
    pub motifs: Vec<String>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Replicates for the critical value.
    #[arg(long, default_value_t = 500)]
    pub replicates: usize,
    /// Replicates for the per-block moments.
    #[arg(long, default_value_t = 50)]
    pub moment_replicates: usize,
    #[arg(long, value_enum, default_value_t = Rule::PerReplicateMax)]
    pub rule: Rule,
}

#[derive(ValueEnum, Debug, Clone, Copy, serde::Serialize)]
pub enum Rule {
    PerReplicateMax,
    Pooled,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct RegressArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// CSV with header `vertex_id,label,...`; extra numeric columns become covariates.
    #[arg(long)]
    pub covariates: std::path::PathBuf,
    #[arg(long, default_value = "triangle,square", value_delimiter = ',')]
    pub motifs: Vec<String>,
    /// Confidence level of the Wald intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    /// Override the preset's replicate or pipeline count.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Override the preset's graph size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Also write the QQ table (fig-c1-qq) to this path.
    #[arg(long)]
    pub table: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    FigC1Qq,
    Level,
    Power,
    Subcritical,
    AvgClt,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let internal = e.downcast_ref::<rootstat::Error>().is_some_and(|e| e.is_internal());
            ExitCode::from(if internal { 2 } else { 1 })
        }
    }
}
