use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sprtree::Method;

/// SPR dynamics on weighted real trees: sampling, chains, metric queries,
/// path surgery and Monte Carlo checks of closed forms.
#[derive(Debug, Parser)]
#[command(name = "sprtree", version, about)]
pub struct Cli {
    /// Worker threads for ensembles; outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a CRT approximation and write it as tree JSON.
    SampleCrt(SampleCrtArgs),
    /// Run the SPR jump chain and write its observables as CSV.
    Chain(ChainArgs),
    /// Monte Carlo check of a closed form, or the decomposition and
    /// exchangeability tests.
    Verify(VerifyArgs),
    /// Distance bounds between two trees in JSON.
    Dist(DistArgs),
    /// Surgery on excursion paths in CSV.
    #[command(subcommand)]
    Path(PathCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Dyck,
    BridgeVervaat,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dyck => Method::Dyck,
            MethodArg::BridgeVervaat => Method::BridgeVervaat,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplerArgs {
    /// Half the number of lattice steps of the path.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Number of equal atoms of the weight measure.
    #[arg(long, default_value_t = 512)]
    pub weight_grid: usize,
    /// Master seed; replica i uses stream i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Dyck)]
    pub method: MethodArg,
}

impl SamplerArgs {
    pub fn config(&self) -> sprtree::SamplerConfig {
        sprtree::SamplerConfig {
            steps: self.steps,
            weight_grid: self.weight_grid,
            seed: self.seed,
            method: self.method.into(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SampleCrtArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerArgs,
    /// Tree JSON output; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Also write the unit excursion `e` (the tree codes `2e`) as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub excursion: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainArgs {
    /// Initial tree: a tree JSON file, or `crt` to sample one.
    #[arg(long)]
    pub init: String,
    /// Model-time horizon.
    #[arg(long = "time")]
    pub time: f64,
    /// Multiplier of the jump rate.
    #[arg(long, default_value_t = 1.0)]
    pub time_scale: f64,
    /// Comma-separated subset of mean-dist,height,diameter.
    #[arg(long, default_value = "mean-dist,height,diameter")]
    pub observables: String,
    /// Comma-separated jump indices whose trees are saved.
    #[arg(long, requires = "snapshot_dir")]
    pub snapshots: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub snapshot_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerArgs,
    /// CSV output; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Formula id, or `decomposition` / `exchangeability`.
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// Lower truncation of ρ for exchangeability pairs.
    #[arg(long, default_value_t = sprtree::sampler::DEFAULT_RHO_MIN)]
    pub rho_min: f64,
    /// Trees, qualifying draws or pairs, depending on the id.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerArgs,
    /// Report JSON output; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub json: Option<PathBuf>,
    /// Record wall-clock runtime in the report (not reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistMode {
    Gh,
    DeltaGhwt,
    DGhwt,
}

#[derive(Debug, Args, Serialize)]
pub struct DistArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_enum, default_value_t = DistMode::DeltaGhwt)]
    pub mode: DistMode,
    /// Net spacing for the finite approximations; chosen from
    /// --max-points when absent.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 32)]
    pub max_points: usize,
    /// Work limit for exhaustive search.
    #[arg(long, default_value_t = 1_000_000)]
    pub exact_limit: usize,
    /// Report JSON output; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PathCommand {
    /// Split a path at the straddle of (s, a) into ê and ě.
    Excise(ExciseArgs),
    /// Insert the rescaled first path into the second at fraction u.
    Insert(InsertArgs),
    /// Excise at (s, a) and regraft the piece at time v of the remainder.
    Spr(PathSprArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExciseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub a: f64,
    /// Output for the excised piece ê.
    #[arg(long)]
    #[serde(skip)]
    pub hat: PathBuf,
    /// Output for the remainder ě.
    #[arg(long)]
    #[serde(skip)]
    pub check: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct InsertArgs {
    #[arg(long)]
    pub first: PathBuf,
    #[arg(long)]
    pub second: PathBuf,
    #[arg(long)]
    pub u: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PathSprArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub v: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}
