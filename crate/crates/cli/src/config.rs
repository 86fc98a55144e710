//! Command-line arguments, optional TOML config file, and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use varsample::solve::TrackSettings;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "VARSAMPLE_CONFIG";

#[derive(Parser, Debug)]
#[command(name = "varsample", version, about = "Sampling, bottlenecks, reach and homology of real algebraic varieties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dense sample of the variety: sample.csv, sample.json, sample.obj, plot_sample.py.
    Sample(CommonArgs),
    /// Degree-2 bottlenecks and the narrowest radius b2: bottlenecks.json.
    Bottlenecks(CommonArgs),
    /// Certified reach lower bound for forms on the unit sphere: reach.json.
    Reach(CommonArgs),
    /// Betti numbers of a complex built on a dense sample: homology.json.
    Homology(CommonArgs),
    /// Total-degree solve of a square system (debugging): solve.json.
    Solve(CommonArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexArg {
    Vr,
    Cech,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffArg {
    Gf2,
    Rational,
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Polynomial system, one equation per line or separated by ';'.
    pub input: PathBuf,
    /// Variable order, comma separated (default: lexicographic).
    #[arg(long, value_delimiter = ',')]
    pub vars: Option<Vec<String>>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// TOML config file (default: $VARSAMPLE_CONFIG).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub epsilon0: Option<f64>,
    /// Grid size override; disables the density certificate unless it happens to hold.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub b2_override: Option<f64>,
    #[arg(long)]
    pub wfs_override: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long, value_enum)]
    pub complex: Option<ComplexArg>,
    #[arg(long, value_enum)]
    pub coeff: Option<CoeffArg>,
    /// Exit with code 4 when the result is not certified.
    #[arg(long)]
    pub require_certificate: bool,
    /// Omit timing fields so identical runs give identical bytes.
    #[arg(long)]
    pub canonical_output: bool,
}

/// Keys accepted in the config file; command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub vars: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub epsilon0: Option<f64>,
    pub delta: Option<f64>,
    pub b2_override: Option<f64>,
    pub wfs_override: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub max_dim: Option<usize>,
    pub complex: Option<ComplexArg>,
    pub coeff: Option<CoeffArg>,
    pub require_certificate: Option<bool>,
    pub canonical_output: Option<bool>,
    pub solver: Option<TrackSettings>,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub vars: Option<Vec<String>>,
    #[serde(skip)]
    pub out: PathBuf,
    pub epsilon: Option<f64>,
    pub epsilon0: Option<f64>,
    pub delta: Option<f64>,
    pub b2_override: Option<f64>,
    pub wfs_override: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub workers: usize,
    pub max_dim: Option<usize>,
    pub complex: ComplexArg,
    pub coeff: CoeffArg,
    pub require_certificate: bool,
    #[serde(skip)]
    pub canonical_output: bool,
    pub solver: TrackSettings,
}

fn load_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn positive(name: &str, v: Option<f64>) -> Result<(), String> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(format!("--{name} must be positive, got {x}")),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn resolve(args: CommonArgs) -> Result<Self, String> {
        let path = args.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let file = match path {
            Some(p) => load_file(&p)?,
            None => FileConfig::default(),
        };
        let seed = args.seed.or(file.seed).unwrap_or(0);
        let mut solver = file.solver.unwrap_or_default();
        solver.rng_seed = seed;
        solver.validate().map_err(|e| e.to_string())?;
        let workers = args.workers.or(file.workers).unwrap_or(0);
        let cfg = Self {
            input: args.input,
            vars: args.vars.or(file.vars),
            out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            epsilon: args.epsilon.or(file.epsilon),
            epsilon0: args.epsilon0.or(file.epsilon0),
            delta: args.delta.or(file.delta),
            b2_override: args.b2_override.or(file.b2_override),
            wfs_override: args.wfs_override.or(file.wfs_override),
            seed,
            workers,
            max_dim: args.max_dim.or(file.max_dim),
            complex: args.complex.or(file.complex).unwrap_or(ComplexArg::Vr),
            coeff: args.coeff.or(file.coeff).unwrap_or(CoeffArg::Gf2),
            require_certificate: args.require_certificate || file.require_certificate.unwrap_or(false),
            canonical_output: args.canonical_output || file.canonical_output.unwrap_or(false),
            solver,
        };
        positive("epsilon", cfg.epsilon)?;
        positive("epsilon0", cfg.epsilon0)?;
        positive("delta", cfg.delta)?;
        positive("b2-override", cfg.b2_override)?;
        positive("wfs-override", cfg.wfs_override)?;
        if args.workers == Some(0) || file.workers == Some(0) {
            return Err("--workers must be a positive integer".into());
        }
        Ok(cfg)
    }

    pub fn require(&self, name: &str, v: Option<f64>) -> Result<f64, String> {
        v.ok_or_else(|| format!("--{name} is required for this command"))
    }
}
