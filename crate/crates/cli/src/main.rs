//! `homsensor`: sweeps and figure data for the coupled-cavity HOM sensor.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::GridSpec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<hom_sensor::Error> for CliError {
    fn from(e: hom_sensor::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "homsensor",
    version,
    about = "Coupled-cavity Hong-Ou-Mandel sensor calculations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat TOML file with the subcommand's keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coincidence probability against photon separation.
    Dip(DipArgs),
    /// Responsivity over a (κ, signal) plane and its ridge.
    RespoMap(RespoMapArgs),
    /// Linear dynamic range at responsivity maxima.
    Ldr(LdrArgs),
    /// Transmission spectrum of a layer stack.
    TmmSpectrum(TmmSpectrumArgs),
    /// Fit the exponential coupling model to simulated splittings.
    FitCoupling(FitCouplingArgs),
    /// Force-sensing performance over separation bias and damping.
    ForceMap(ForceMapArgs),
    /// Refractive-index sensing performance over damping.
    RiMap(RiMapArgs),
    /// Cramér-Rao trial counts per input state.
    Fisher(FisherArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub gamma_hz: Option<f64>,
    #[arg(long)]
    pub kappa_hz: Option<f64>,
    #[arg(long)]
    pub g_hz: Option<f64>,
    /// Separation grid in units of 1/γ.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<GridSpec>,
    /// Also integrate the Langevin equations and report the discrepancy.
    #[arg(long)]
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// g/γ against κ/γ.
    G,
    /// Separation x (nm) against κ (Hz).
    X,
    /// Hole index n against κ (Hz).
    N,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RespoMapArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    #[arg(long)]
    pub gamma_hz: Option<f64>,
    #[arg(long)]
    pub signal_grid: Option<GridSpec>,
    #[arg(long)]
    pub kappa_grid: Option<GridSpec>,
    /// Separation for the n axis, nm.
    #[arg(long)]
    pub x_bias: Option<f64>,
    /// Coupling model written by `fit-coupling --format json`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdrArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub gamma_hz: Option<f64>,
    /// κ/γ values; each is biased at its strongest responsivity maximum.
    #[arg(long)]
    pub kappa_grid: Option<GridSpec>,
    /// Explicit bias; requires --kappa-hz.
    #[arg(long, requires = "kappa_hz")]
    pub g_hz: Option<f64>,
    #[arg(long)]
    pub kappa_hz: Option<f64>,
    #[arg(long)]
    pub f_hz: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub linearity_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmmSpectrumArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// TOML stack file (`[[layers]]` with thickness_nm, index, role).
    #[arg(long)]
    pub stack: Option<PathBuf>,
    #[arg(long)]
    pub mirror_pairs: Option<usize>,
    #[arg(long)]
    pub spacer_pairs: Option<usize>,
    #[arg(long)]
    pub hole_index: Option<f64>,
    /// Wavelength grid, nm.
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitCouplingArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub mirror_pairs: Option<usize>,
    /// Spacer pair counts of the x sweep.
    #[arg(long, value_delimiter = ',')]
    pub spacer_sweep: Option<Vec<usize>>,
    /// Spacer pair count held during the n sweep.
    #[arg(long)]
    pub spacer_pairs: Option<usize>,
    #[arg(long)]
    pub hole_grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceMapArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub gamma_hz: Option<f64>,
    /// κ grid, Hz.
    #[arg(long)]
    pub kappa_grid: Option<GridSpec>,
    /// Separation grid, nm.
    #[arg(long)]
    pub x_grid: Option<GridSpec>,
    #[arg(long)]
    pub f_hz: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub youngs_modulus_gpa: Option<f64>,
    #[arg(long)]
    pub thickness_um: Option<f64>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiMapArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub gamma_hz: Option<f64>,
    #[arg(long)]
    pub kappa_grid: Option<GridSpec>,
    #[arg(long)]
    pub x_bias: Option<f64>,
    #[arg(long)]
    pub f_hz: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FisherArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub mse: Option<f64>,
    /// coherent_n1, coherent_n2, fock_serial_n1 or fock_hom_n2; all when omitted.
    #[arg(long, visible_alias = "input-config")]
    pub input: Option<String>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let doc = match cli.command {
        Command::Dip(a) => commands::dip(a)?,
        Command::RespoMap(a) => commands::respo_map(a)?,
        Command::Ldr(a) => commands::ldr(a)?,
        Command::TmmSpectrum(a) => commands::tmm_spectrum(a)?,
        Command::FitCoupling(a) => commands::fit_coupling(a)?,
        Command::ForceMap(a) => commands::force_map(a)?,
        Command::RiMap(a) => commands::ri_map(a)?,
        Command::Fisher(a) => commands::fisher(a)?,
    };
    doc.emit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("homsensor: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
