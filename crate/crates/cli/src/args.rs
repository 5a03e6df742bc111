use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Approximate capacity of ratio- and concentration-shift-keyed
/// molecular channels.
#[derive(Debug, Parser)]
#[command(name = "rskcap", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity against a swept parameter for the chosen schemes.
    Capacity(CapacityArgs),
    /// Capacity-achieving input densities on a grid.
    Oid(OidArgs),
    /// Monte-Carlo variance of the ratio estimators against their bounds.
    Simulate(SimulateArgs),
    /// Blahut-Arimoto capacity of discretised channels.
    Ba(BaArgs),
    /// Regenerate the data behind one figure, with a JSON manifest.
    Reproduce(ReproduceArgs),
}

/// Flags shared by the table-producing commands.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML file whose keys mirror the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, allow_hyphen_values = true)]
    pub jobs: Option<String>,
    /// Output format: csv or json.
    #[arg(long, allow_hyphen_values = true)]
    pub format: Option<String>,
    /// Output file (default: stdout). Relative paths go under $RSKCAP_OUT_DIR when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Absolute tolerance of the capacity integral.
    #[arg(long, allow_hyphen_values = true)]
    pub abs_tol: Option<String>,
    /// Relative tolerance of the capacity integral.
    #[arg(long, allow_hyphen_values = true)]
    pub rel_tol: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CapacityArgs {
    /// Comma-separated schemes: rsk-opt, rsk-sub, csk.
    #[arg(long, allow_hyphen_values = true)]
    pub scheme: Option<String>,
    /// Unbinding-rate ratio k1/k2 (RSK).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Number of receptors.
    #[arg(long, allow_hyphen_values = true)]
    pub nr: Option<String>,
    /// Concentration cap in units of K_D (CSK); `inf` for none.
    #[arg(long, allow_hyphen_values = true)]
    pub cmax: Option<String>,
    /// Proofreading threshold times the faster unbinding rate.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_factor: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OidArgs {
    /// Comma-separated schemes: rsk-opt, rsk-sub, csk.
    #[arg(long, allow_hyphen_values = true)]
    pub scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nr: Option<String>,
    /// Ratio grid for the RSK schemes.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_grid: Option<String>,
    /// Concentration grid for CSK, in units of K_D.
    #[arg(long, allow_hyphen_values = true)]
    pub c_grid: Option<String>,
    /// Concentration cap for CSK; `inf` for none.
    #[arg(long, allow_hyphen_values = true)]
    pub cmax: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_factor: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// True ratio(s) of type-1 ligands.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nr: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub trials: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_factor: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BaArgs {
    /// Comma-separated schemes: rsk-sub, csk.
    #[arg(long, allow_hyphen_values = true)]
    pub scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nr: Option<String>,
    /// Number of channel inputs.
    #[arg(long, allow_hyphen_values = true)]
    pub inputs: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub cmax: Option<String>,
    /// Smallest CSK input; inputs are log-spaced up to the cap.
    #[arg(long, allow_hyphen_values = true)]
    pub cmin: Option<String>,
    /// Stop when the capacity bounds are this close, in bits.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub max_iter: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_factor: Option<String>,
    /// Also write the optimising input distributions here (same format).
    #[arg(long)]
    pub distribution: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig2a,
    Fig2b,
    Fig2c,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig1c => "fig1c",
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    pub figure: Figure,
    /// Directory for `<figure>.csv` and `<figure>.manifest.json`
    /// (default: $RSKCAP_OUT_DIR, else the working directory).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub jobs: Option<String>,
    /// Recorded in the manifest; the figures involve no sampling.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub abs_tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rel_tol: Option<String>,
}
