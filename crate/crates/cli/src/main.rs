//! `cryoqpm` command-line front end.
//!
//! Exit codes: 0 success, 1 fit failure, 2 I/O, parse or configuration
//! error, 3 domain or numerical error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cryoqpm::Error;

#[derive(Parser)]
#[command(name = "cryoqpm", version, about = "Cryogenic quasi-phase-matching design and photon-pair analysis")]
pub struct Cli {
    /// Dispersion dataset (TOML); defaults to the bundled lithium niobate data.
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    /// Run configuration file (TOML). Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for reports and CSV files [default: .].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for Monte-Carlo subcommands [default: 1].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write a gnuplot script next to every CSV.
    #[arg(long, global = true)]
    pub plot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Poling period for a target SHG wavelength at a temperature.
    Design(DesignArgs),
    /// SHG tuning curve of a waveguide.
    Shg(ShgArgs),
    /// Fit measured data.
    Fit(FitArgs),
    /// Joint spectrum, marginals and Schmidt decomposition.
    Jsa(JsaArgs),
    /// Predicted HOM dip, optionally with a simulated four-detector scan.
    Hom(HomArgs),
    /// Klyshko efficiency, heralded g2 and brightness from count rates.
    Metrics(MetricsArgs),
}

#[derive(Args, Clone, Default)]
pub struct DeviceArgs {
    /// Poling period at 295 K, µm.
    #[arg(long)]
    pub period_um: Option<f64>,
    /// Device length at 295 K, mm.
    #[arg(long)]
    pub length_mm: Option<f64>,
    /// Operating temperature, K [default: 295].
    #[arg(long)]
    pub temperature_k: Option<f64>,
}

#[derive(Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Target fundamental wavelength, nm.
    #[arg(long)]
    pub target_nm: Option<f64>,
}

#[derive(Args)]
pub struct ShgArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Wavelength range, nm [default: phase-matched wavelength ± 3 nm].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub range_nm: Option<Vec<f64>>,
    /// Number of samples [default: 401].
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FitMode {
    Shg,
    Calibration,
    Gaussian,
    Hom,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Uniform,
    TwoSegment,
    Polynomial,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub mode: FitMode,
    /// Input CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Profile family for `shg` mode.
    #[arg(long, value_enum, default_value = "two-segment")]
    pub profile: ProfileArg,
    /// Polynomial degree for `--profile polynomial`.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Abscissa column for `gaussian` mode.
    #[arg(long, default_value = "wavelength_nm")]
    pub x_column: String,
    /// Ordinate column for `gaussian` mode.
    #[arg(long, default_value = "intensity")]
    pub y_column: String,
    /// Integration time per delay for `hom` mode, s.
    #[arg(long)]
    pub integration_time_s: Option<f64>,
    /// Baseline window |τ - τ_min| for `hom` mode, ps.
    #[arg(long, num_args = 2, value_names = ["NEAR", "FAR"])]
    pub baseline_window_ps: Option<Vec<f64>>,
}

#[derive(Args, Clone, Default)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Read a JSI CSV instead of computing the joint spectrum.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Constant phase matching (pump envelope only).
    #[arg(long)]
    pub flat: bool,
    /// Pump center, nm.
    #[arg(long)]
    pub pump_nm: Option<f64>,
    /// Pump intensity FWHM, nm.
    #[arg(long)]
    pub pump_fwhm_nm: Option<f64>,
    /// `gaussian` or `sech2`.
    #[arg(long)]
    pub pump_shape: Option<String>,
    /// Half-span of both grid axes, nm [default: automatic grid].
    #[arg(long)]
    pub half_span_nm: Option<f64>,
    /// Points per grid axis [default: 201].
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Signal filter FWHM, nm.
    #[arg(long)]
    pub signal_filter_nm: Option<f64>,
    /// Idler filter FWHM, nm.
    #[arg(long)]
    pub idler_filter_nm: Option<f64>,
    /// `gaussian` or `rectangular`.
    #[arg(long)]
    pub filter_shape: Option<String>,
}

#[derive(Args)]
pub struct JsaArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
}

#[derive(Args)]
pub struct HomArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    /// Delay range, ps [default: -10 10].
    #[arg(long, num_args = 2, value_names = ["FROM", "TO"])]
    pub delay_range_ps: Option<Vec<f64>>,
    /// Number of delays [default: 401].
    #[arg(long)]
    pub delay_points: Option<usize>,
    /// Also write a Poisson-sampled four-detector scan of the predicted dip.
    #[arg(long)]
    pub simulate_scan: bool,
    /// Simulated cross-path coincidence rate far from the dip, 1/s [default: 2e4].
    #[arg(long)]
    pub baseline_rate: Option<f64>,
    /// Simulated singles rate per detector, 1/s [default: 1e5].
    #[arg(long)]
    pub singles_rate: Option<f64>,
    /// Simulated integration time per delay, s [default: 10].
    #[arg(long)]
    pub integration_time_s: Option<f64>,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Count-rate summary (TOML keys C_s, C_i, C_si, C_i1s, C_i2s, C_i1i2s, P_trans, integration_time).
    #[arg(long)]
    pub input: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Fit(_) => 1,
        Error::Io { .. } | Error::Parse { .. } | Error::Config(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cryoqpm: error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
