use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lsdr_core::geometry::DEFAULT_MAX_DIM;
use lsdr_core::pipeline::lsdr::DEFAULT_ALPHA;
use lsdr_core::pipeline::KernelFamily;
use lsdr_core::skeleton::DEFAULT_K;
use lsdr_core::LsdrConfig;

pub const DEFAULT_TRANSFORMS: usize = 32;

/// Localized skeletonization and dimensionality reduction.
#[derive(Debug, Parser)]
#[command(name = "lsdr", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Worker threads for internal parallelism; all cores by default.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Fail with exit code 5 when LSDR falls back to MDS on all points.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Log verbosity on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Generate a synthetic dataset.
    Generate(GenerateArgs),
    /// Reduce a CSV point cloud with LSDR or PCA.
    Reduce(ReduceArgs),
    /// Compute trustability, consistency and neighbourhood indices.
    Index(IndexArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Reduce(_) => "reduce",
            Command::Index(_) => "index",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub family: String,

    #[arg(long)]
    pub n: usize,

    /// Ambient dimension for families that do not fix it.
    #[arg(long)]
    pub p: Option<usize>,

    #[arg(long)]
    pub noise: Option<f64>,

    #[arg(long)]
    pub clusters: Option<usize>,

    /// Unit gap between consecutive cluster centres.
    #[arg(long)]
    pub separation: Option<f64>,

    /// Explicit gaps between consecutive cluster centres.
    #[arg(long, value_delimiter = ',')]
    pub gaps: Option<Vec<f64>>,

    /// Spiral turns.
    #[arg(long)]
    pub turns: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Dataset CSV to write.
    #[arg(long, short)]
    pub out: PathBuf,

    /// Manifest path; `<out>.manifest.json` by default.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Lsdr,
    Pca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexAlgo {
    Lsdr,
    Pca,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelArg {
    #[default]
    Gaussian,
    Bregman,
}

/// Settings of the LSDR pipeline.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LsdrArgs {
    /// Edge-pruning confidence level.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,

    /// Graph neighbours compared when marking skeletal points.
    #[arg(long = "neighbours", default_value_t = DEFAULT_K)]
    pub k: usize,

    #[arg(long, value_enum, default_value_t)]
    pub kernel: KernelArg,

    /// Smoothing bandwidth; the recommended value by default.
    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// Project onto this many principal coordinates before tessellating.
    #[arg(long)]
    pub pre_reduce: Option<usize>,

    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub max_tess_dim: usize,

    /// Compute graph distances from skeletal points only.
    #[arg(long)]
    pub restrict_distances: bool,
}

impl LsdrArgs {
    pub fn config(&self, d: usize, seed: u64) -> LsdrConfig {
        LsdrConfig {
            alpha: self.alpha,
            k: self.k,
            d,
            kernel: match self.kernel {
                KernelArg::Gaussian => KernelFamily::Gaussian,
                KernelArg::Bregman => KernelFamily::BregmanIndicator,
            },
            bandwidth: self.bandwidth,
            seed,
            max_tess_dim: self.max_tess_dim,
            pre_reduce_dim: self.pre_reduce,
            restrict_distances: self.restrict_distances,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReduceArgs {
    /// Input CSV point cloud.
    #[arg(long, short)]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = Algo::Lsdr)]
    pub algo: Algo,

    /// Target dimension.
    #[arg(long)]
    pub d: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub lsdr: LsdrArgs,

    /// Also write the manifold graph as an edge list.
    #[arg(long)]
    pub dump_graph: bool,

    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,

    /// File name prefix; the algorithm name by default.
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IndexArgs {
    /// Input CSV point cloud.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Algorithm to evaluate.
    #[arg(long, value_enum, conflicts_with = "embedding")]
    pub algo: Option<IndexAlgo>,

    /// Precomputed embedding CSV, row-aligned with the input.
    #[arg(long)]
    pub embedding: Option<PathBuf>,

    /// Target dimension; `p` by default for identity and PCA.
    #[arg(long)]
    pub d: Option<usize>,

    /// Trustability index (reduces to `d = p`).
    #[arg(long)]
    pub ti: bool,

    /// Tractable consistency index.
    #[arg(long)]
    pub tci: bool,

    /// Transforms evaluated for the consistency index.
    #[arg(long, default_value_t = DEFAULT_TRANSFORMS)]
    pub transforms: usize,

    /// Bandwidth of the consistency transforms.
    #[arg(long)]
    pub tci_bandwidth: Option<f64>,

    /// Neighbourhood size for TSI, trustworthiness and continuity.
    #[arg(long)]
    pub knn: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub lsdr: LsdrArgs,

    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,

    /// File name prefix; the algorithm name by default.
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,

    /// Write outputs here instead of their recorded locations.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
