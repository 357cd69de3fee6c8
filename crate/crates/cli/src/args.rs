use clap::{Args, Parser, Subcommand, ValueEnum};
use hetren_core::Precision;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "hetren", version, about = "Renormalization laboratory for saddle-focus heteroclinic cycles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Check structural, spectral and transversality conditions of a model config
    CheckModel {
        config: PathBuf,
    },
    /// Search a sojourn schedule (m_k, n_k) for a target xi
    SearchSojourn(SearchArgs),
    /// Run the renormalization convergence report and write CSV, SVG and a manifest
    Renormalize(RenormArgs),
    /// Certify the blender scheme numerically and emit a JSON report
    Certify(CertifyArgs),
    /// Iterate a limit map and write the orbit as CSV
    Orbit(OrbitArgs),
    /// Re-run the command recorded in a manifest
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 1.185)]
    pub xi: f64,
    /// Tolerance of the first entry; later entries halve it
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Schedule JSON destination
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RenormArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 1.185)]
    pub xi: f64,
    #[arg(long, default_value_t = -9.5, allow_hyphen_values = true)]
    pub mu: f64,
    /// Points per axis of the evaluation grid on [-1, 1]^3
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    /// native or extended; defaults to HETREN_PRECISION, then the config
    #[arg(long)]
    pub precision: Option<Precision>,
    /// Schedule JSON from search-sojourn; computed inline when absent
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    pub fd_step: f64,
    #[arg(long, default_value = "renorm-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CertifyArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 1.185)]
    pub xi: f64,
    #[arg(long, default_value_t = -9.5, allow_hyphen_values = true)]
    pub mu: f64,
    /// Half-width of the blender box in (kappa, eta)
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long)]
    pub precision: Option<Precision>,
    #[arg(long, default_value_t = 1e-5)]
    pub fd_step: f64,
    /// Report JSON destination; printed to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Family {
    G,
    E,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OrbitArgs {
    #[arg(long, value_enum, ignore_case = true)]
    pub family: Family,
    #[arg(long, default_value_t = 1.185)]
    pub xi: f64,
    #[arg(long, default_value_t = -9.5, allow_hyphen_values = true)]
    pub mu: f64,
    /// G only
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub kappa1: f64,
    /// G only
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub kappa2: f64,
    /// E only: five comma-separated coefficients
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 0.0, 0.0, 0.1], allow_hyphen_values = true)]
    pub sigma: Vec<f64>,
    /// Initial point as x,y,z
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0, 0.0], allow_hyphen_values = true)]
    pub start: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = hetren_core::henon_limit::DEFAULT_ESCAPE_BOUND)]
    pub escape_bound: f64,
    /// CSV destination; printed to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}
