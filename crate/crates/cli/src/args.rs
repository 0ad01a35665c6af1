use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "twsbr", version, about = "Two-wheeled self-balancing robot workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one closed-loop scenario and write its telemetry.
    Simulate(SimulateArgs),
    /// Sweep a loop gain and write closed-loop pole locations.
    Rootlocus(RootlocusArgs),
    /// Run several controllers on the same scenario.
    Compare(CompareArgs),
    /// Host a live session for the front panel.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerArg {
    Pid,
    #[value(name = "lead_lag", alias = "leadlag")]
    LeadLag,
    Flc,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    /// Telemetry CSV path; the metrics summary goes next to it as
    /// `<stem>.metrics.txt`.
    #[arg(long)]
    pub out: PathBuf,
    /// Replace the scenario's controller with the reference configuration
    /// of this kind.
    #[arg(long)]
    pub controller: Option<ControllerArg>,
    #[arg(long)]
    pub kp: Option<f64>,
    #[arg(long)]
    pub ki: Option<f64>,
    #[arg(long)]
    pub kd: Option<f64>,
    #[arg(long)]
    pub ku: Option<f64>,
    #[arg(long)]
    pub kc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompensatorArg {
    None,
    Pid,
    Leadlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Log,
    Linear,
}

#[derive(Debug, Args)]
pub struct RootlocusArgs {
    #[arg(long, value_enum, default_value_t = CompensatorArg::None)]
    pub compensator: CompensatorArg,
    /// Smallest loop gain. For `leadlag` the gain is K_c; for `pid` it
    /// multiplies the reference gains.
    #[arg(long, default_value_t = 0.01)]
    pub kmin: f64,
    #[arg(long, default_value_t = 100.0)]
    pub kmax: f64,
    /// Grid size. A single point requires `kmin == kmax`.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = GridArg::Log)]
    pub grid: GridArg,
    /// Scenario whose plant and actuator are analysed; defaults to the
    /// reference robot.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub scenario: PathBuf,
    /// Comma-separated controller kinds; the scenario's own configuration
    /// is used for its kind, reference settings for the rest.
    #[arg(long, value_delimiter = ',', default_value = "pid,lead_lag,flc")]
    pub controllers: Vec<ControllerArg>,
    /// CSV path; an aligned text table is written to `<stem>.txt` and
    /// printed.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub scenario: PathBuf,
    /// Overridden by the PORT environment variable.
    #[arg(long, default_value_t = 8765)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Simulated seconds per wall-clock second; 0 runs unpaced.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
    /// Stream every n-th tick.
    #[arg(long, default_value_t = twsbr_core::server::DEFAULT_DECIMATION)]
    pub decimation: u32,
    /// Write the full-rate log here when a run completes.
    #[arg(long)]
    pub log: Option<PathBuf>,
}
