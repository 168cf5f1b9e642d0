//! Flag parsing, JSON config overrides, and the reproducibility hash.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "ttprob", version, about = "Tensor-train divergence experiments")]
pub struct Cli {
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<String>,

    /// Report format.
    #[arg(long, global = true, default_value = "csv")]
    pub format: Format,

    /// Emit per-iteration diagnostics as JSON lines on stderr.
    #[arg(long, global = true)]
    pub trace: bool,

    /// JSON file whose fields override the command-line flags.
    #[arg(long, global = true)]
    pub config: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// KL divergence between two isotropic Gaussians vs the closed form.
    GaussianKld(GaussianArgs),
    /// Hellinger distance between two isotropic Gaussians vs the closed form.
    GaussianHellinger(GaussianArgs),
    /// KL divergence between two elliptically contoured α-stable laws.
    AlphaKld(AlphaArgs),
    /// Hellinger distance between two α-stable laws.
    AlphaHellinger(AlphaArgs),
    /// Timings and oracle errors for the point-wise iteration family.
    PointwiseBench(BenchArgs),
    /// Apply a point-wise function to a TT tensor serialized as JSON.
    Func(FuncArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Dimensions, comma separated (one report row per entry).
    #[arg(long, value_delimiter = ',', default_value = "16")]
    pub d: Vec<usize>,

    /// Grid points per dimension.
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    /// Grid half-width per dimension.
    #[arg(long, default_value_t = 128.0)]
    pub a: f64,

    /// Rounding tolerance ε of T_ε.
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,

    /// Iteration stopping tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Cross-approximation validation tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub cross_tol: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct GaussianArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, default_value_t = 1.5)]
    pub sigma1: f64,

    #[arg(long, default_value_t = 22.1)]
    pub sigma2: f64,

    #[arg(long, default_value_t = 1.1)]
    pub mu1: f64,

    #[arg(long, default_value_t = 1.4)]
    pub mu2: f64,
}

#[derive(Args, Debug, Clone)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, default_value_t = 2.0)]
    pub alpha1: f64,

    #[arg(long, default_value_t = 1.9)]
    pub alpha2: f64,

    /// Exponent convention: "code" for (⟨t,t⟩/2)^{α/2}, "quadratic" for
    /// ⟨t,t⟩^{α/2}.
    #[arg(long, default_value = "code")]
    pub convention: String,

    /// Cross rank cap.
    #[arg(long, default_value_t = 100)]
    pub max_rank: usize,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Interior TT rank of the random test tensor.
    #[arg(long, default_value_t = 3)]
    pub rank: usize,
}

#[derive(Args, Debug, Clone)]
pub struct FuncArgs {
    /// Input TT-JSON file.
    #[arg(long)]
    pub input: String,

    /// One of: inverse, sqrt, invsqrt, exp, log, sign, abs, square.
    #[arg(long)]
    pub function: String,

    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

/// Optional JSON overrides; any present field replaces the flag value.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub d: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub eps: Option<f64>,
    pub tol: Option<f64>,
    pub cross_tol: Option<f64>,
    pub seed: Option<u64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub convention: Option<String>,
    pub max_rank: Option<usize>,
}

pub fn load_overrides(path: &str) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))
}

pub fn apply_common(cfg: &FileConfig, common: &mut CommonArgs) {
    if let Some(v) = &cfg.d {
        common.d = v.clone();
    }
    if let Some(v) = cfg.n {
        common.n = v;
    }
    if let Some(v) = cfg.a {
        common.a = v;
    }
    if let Some(v) = cfg.eps {
        common.eps = v;
    }
    if let Some(v) = cfg.tol {
        common.tol = v;
    }
    if let Some(v) = cfg.cross_tol {
        common.cross_tol = v;
    }
    if let Some(v) = cfg.seed {
        common.seed = v;
    }
}

/// FNV-1a of the canonical parameter string: every row carries it so a run
/// can be reproduced exactly.
pub fn config_hash(canonical: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in canonical.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
