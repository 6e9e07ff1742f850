//! Batch front end for the decay-rate lidar toolkit.
//!
//! Data goes to files, logs go to stderr. Every command is deterministic
//! given its config and seed. Exit codes: 0 success, 2 config or validation
//! error, 3 I/O error, 4 numeric failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use decay_lidar::model::ModelKind;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<decay_lidar::Error> for CliError {
    fn from(e: decay_lidar::Error) -> Self {
        use decay_lidar::Error;
        match e {
            Error::InvalidArgument(m) => CliError::Config(m),
            Error::GeometryMismatch(m) => CliError::Config(m),
            Error::Io(m) => CliError::Io(m.to_string()),
            Error::Parse { .. } => CliError::Io(e.to_string()),
            Error::Numeric(m) => CliError::Numeric(m),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "decay-lidar",
    about = "Decay-rate lidar sensor models: simulation, mapping, localization, evaluation",
    version
)]
struct Cli {
    /// Worker threads; falls back to DECAY_LIDAR_THREADS, then 1.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world, a trajectory, and scans sampled from it.
    Simulate(SimulateArgs),
    /// Build a map of the chosen model from a scan file.
    BuildMap(BuildMapArgs),
    /// Run Monte Carlo localization of scans against a map.
    Localize(LocalizeArgs),
    /// Compare the three sensor models on the same scans.
    Eval(EvalArgs),
    /// Flatten results into plain CSV series for plotting.
    PlotData(PlotDataArgs),
    /// Export point clouds for external viewers.
    Export(ExportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run configuration (needs world, sensor, trajectory).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for world.drm, scans.dsc, trajectory.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BuildMapArgs {
    /// Input scan file (DSC1).
    #[arg(long)]
    scans: PathBuf,
    /// Sensor model to build; defaults to the config's `model`.
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    config: PathBuf,
    /// Output map file (DRM1 / RFM1 / LFM1 depending on the model).
    #[arg(long)]
    out: PathBuf,
    /// Also write the raw decay accumulator (DRA1); decay model only.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct LocalizeArgs {
    /// Map file; its magic selects the sensor model.
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scans: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Output trajectory CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    decay_map: PathBuf,
    #[arg(long)]
    reflection_map: PathBuf,
    #[arg(long)]
    endpoint_map: PathBuf,
    /// Evaluation scans with ground-truth poses.
    #[arg(long)]
    scans: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Report JSON path; a CSV flattening is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Evaluate the inverse-KL surrogate as a raw density instead of
    /// renormalizing it over the pose samples.
    #[arg(long)]
    kl_raw: bool,
}

#[derive(Args)]
pub(crate) struct PlotDataArgs {
    /// Trajectory CSV: emit an error-vs-step series.
    #[arg(long)]
    pub(crate) trajectory: Option<PathBuf>,
    /// Report JSON: emit the model-by-metric table.
    #[arg(long)]
    pub(crate) report: Option<PathBuf>,
    /// Probe line origin "x,y,z": emit per-model density curves along it.
    #[arg(long, allow_hyphen_values = true)]
    pub(crate) probe_origin: Option<String>,
    /// Probe direction "x,y,z" (normalized internally).
    #[arg(long, allow_hyphen_values = true)]
    pub(crate) probe_direction: Option<String>,
    /// Probe maximum range, meters.
    #[arg(long, default_value_t = 20.0)]
    pub(crate) probe_r_max: f64,
    /// Probe sample step, meters.
    #[arg(long, default_value_t = 0.05)]
    pub(crate) probe_step: f64,
    #[arg(long)]
    pub(crate) decay_map: Option<PathBuf>,
    #[arg(long)]
    pub(crate) reflection_map: Option<PathBuf>,
    #[arg(long)]
    pub(crate) endpoint_map: Option<PathBuf>,
    #[arg(long)]
    pub(crate) out: PathBuf,
}

#[derive(Args)]
pub(crate) struct ExportArgs {
    /// Scan file: export range endpoints in the world frame.
    #[arg(long)]
    pub(crate) scans: Option<PathBuf>,
    /// Decay map: export the top-down rate-sum projection.
    #[arg(long)]
    pub(crate) map: Option<PathBuf>,
    /// csv or ply-ascii.
    #[arg(long, default_value = "csv")]
    pub(crate) format: String,
    #[arg(long)]
    pub(crate) out: PathBuf,
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::config("--threads must be >= 1"));
        }
        return Ok(n);
    }
    match std::env::var("DECAY_LIDAR_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| CliError::config(format!("DECAY_LIDAR_THREADS='{v}' is not a number")))?;
            if n == 0 {
                return Err(CliError::config("DECAY_LIDAR_THREADS must be >= 1"));
            }
            Ok(n)
        }
        Err(_) => Ok(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match resolve_threads(cli.threads) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(&args.config, &args.out_dir),
        Command::BuildMap(args) => commands::build_map(
            &args.scans,
            args.model,
            &args.config,
            &args.out,
            args.checkpoint.as_deref(),
            threads,
        ),
        Command::Localize(args) => {
            commands::localize(&args.map, &args.scans, &args.config, &args.out, threads)
        }
        Command::Eval(args) => commands::eval(
            &args.decay_map,
            &args.reflection_map,
            &args.endpoint_map,
            &args.scans,
            &args.config,
            &args.out,
            args.kl_raw,
            threads,
        ),
        Command::PlotData(args) => commands::plot_data(&args),
        Command::Export(args) => commands::export(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
