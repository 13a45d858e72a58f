use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "contrastive-vc", version, about = "Realizability, shattering and sample-complexity tools for contrastive queries")]
pub struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: available parallelism). CONTRASTIVE_VC_THREADS overrides.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Exit with status 3 when the answer rests on an undecided (UNKNOWN) check.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the labeled queries in a file are realizable.
    Realize(RealizeArgs),
    /// Check whether every labeling of the queries in a file is realizable.
    Shatter(ShatterArgs),
    /// Greedy search for a large shattered triplet set.
    Vcdim(VcdimArgs),
    /// Build an explicit shattered set and optionally verify every labeling.
    Construct(ConstructArgs),
    /// Dimension and sample-complexity bounds for one setting.
    Bounds(BoundsArgs),
    /// Monte Carlo estimate of the hemisphere miss probability.
    Wendel(WendelArgs),
    /// Random Gaussian projection distortion check.
    JlCheck(JlArgs),
    /// Train embeddings on synthetic triplets and report generalization gaps (CSV).
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Realize(_) => "realize",
            Command::Shatter(_) => "shatter",
            Command::Vcdim(_) => "vcdim",
            Command::Construct(_) => "construct",
            Command::Bounds(_) => "bounds",
            Command::Wendel(_) => "wendel",
            Command::JlCheck(_) => "jl-check",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    /// Numeric search restarts.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Numeric search iterations per restart.
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    /// Exact per-coordinate ordering enumeration for p = 1 in d > 1.
    #[arg(long)]
    pub exact_odd_p: bool,
    #[arg(long, default_value_t = 8)]
    pub line_cap: usize,
    #[arg(long, default_value_t = 6)]
    pub tree_cap: usize,
    /// Cap on equality-label branches for class partitions.
    #[arg(long, default_value_t = 1 << 16)]
    pub branch_cap: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct RealizeArgs {
    /// Query file with class and labels.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OnUnknown {
    /// Count an undecided labeling as a refuter.
    Refute,
    /// Stop with an error at the first undecided labeling.
    Abort,
}

#[derive(Debug, Args, Serialize)]
pub struct ShatterArgs {
    /// Query file with a class (labels are ignored).
    #[arg(long)]
    pub input: PathBuf,
    /// Policy for undecided labelings; required for numeric classes.
    #[arg(long, value_enum)]
    pub on_unknown: Option<OnUnknown>,
    /// Candidate pair `A,B` used for every k-negative query.
    #[arg(long, value_parser = parse_pair)]
    pub label_pair: Option<(usize, usize)>,
    #[arg(long, default_value_t = 1 << 20)]
    pub labeling_cap: u64,
    #[command(flatten)]
    pub search: SearchArgs,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B but got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ClassName {
    Arbitrary,
    Metric,
    Lp,
    Cosine,
    Tree,
    ClassPartition,
    SeparatedL2,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassArgs {
    #[arg(long, value_enum)]
    pub class: ClassName,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VcdimArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub class: ClassArgs,
    /// Number of restarts of the greedy scan.
    #[arg(long, default_value_t = 4)]
    pub budget: usize,
    #[arg(long, default_value_t = 12)]
    pub max_queries: usize,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Lp,
    Cosine,
    Arbitrary,
    Class,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<u32>,
    /// Rebuild and exactly re-check the witness of every labeling.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub setting: ClassName,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fixed-dimension counting for l_p.
    #[arg(long)]
    pub constant_d: bool,
    /// Number of negatives per query.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long)]
    pub agnostic: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Generic,
    Repeated,
    Collinear,
}

#[derive(Debug, Args, Serialize)]
pub struct WendelArgs {
    /// Ambient dimension l.
    #[arg(long)]
    pub dim: usize,
    /// Number of vectors m.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = Layout::Generic)]
    pub layout: Layout,
    /// Use these vectors (`{"points": [...]}`) instead of sampling.
    #[arg(long, conflicts_with = "layout")]
    pub vectors: Option<PathBuf>,
    /// Cross-check every pattern against the separating-hyperplane system.
    #[arg(long)]
    pub check_duality: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct JlArgs {
    /// Points file, `{"points": [[...], ...]}`.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub beta: f64,
    /// Target dimension (default ceil(15 ln n / beta^2)).
    #[arg(long)]
    pub d1: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Sweep configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
}
