//! `cubic-tba`: periods, spectral networks, BPS spectra, the integral
//! iteration, asymptotics and polygon invariants from the command line.

mod commands;
mod input;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cubic_tba::curve::Charge;
use cubic_tba::model::Example;

use crate::output::CliError;

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "CUBIC_TBA_THREADS";

#[derive(Parser)]
#[command(name = "cubic-tba", version, about = "Spectral coordinates of polynomial cubic differentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roots, base sheets and basis periods of a curve.
    Periods(PeriodsArgs),
    /// Trace networks, export sweeps, or scan for BPS webs.
    #[command(subcommand)]
    Network(NetworkCommand),
    /// Built-in spectra and spectrum files.
    #[command(subcommand)]
    Bps(BpsCommand),
    /// Solve the integral iteration.
    #[command(subcommand)]
    Tba(TbaCommand),
    /// Large-R predictions and remainders.
    #[command(subcommand)]
    Asym(AsymCommand),
    /// Evaluate polygon invariants.
    #[command(subcommand)]
    Polygon(PolygonCommand),
    /// Run the whole pipeline for a shipped example and compare with published numbers.
    Reproduce(ReproduceArgs),
}

/// Which curve to work on.
#[derive(Args, Clone)]
#[group(required = false, multiple = false)]
pub struct Source {
    /// A shipped example (pentagon or hexagon).
    #[arg(long)]
    pub example: Option<Example>,
    /// A curve-definition JSON file.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Args)]
pub struct PeriodsArgs {
    #[command(flatten)]
    pub source: Source,
    /// Extra charges to report, e.g. `1,-1`.
    #[arg(long = "charge", allow_hyphen_values = true)]
    pub charges: Vec<Charge>,
    /// Also write the resolved curve definition (accepted by `--curve`).
    #[arg(long)]
    pub definition_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum NetworkCommand {
    /// Grow one network and classify infinity.
    Trace(TraceArgs),
    /// Polyline frames for `ϑ = start + k·step`.
    Sweep(SweepArgs),
    /// Scan phases for finite webs and harvest a spectrum.
    Bps(ScanArgs),
}

#[derive(Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Stop after this many generations instead of growing to closure.
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain-text polylines for plotting.
    #[arg(long)]
    pub polylines: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub start: f64,
    /// Phase step, π/300 by default.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the harvested spectrum (accepted by `--spectrum`).
    #[arg(long)]
    pub spectrum_out: Option<PathBuf>,
    #[arg(long)]
    pub polylines: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BpsCommand {
    /// Write a built-in spectrum.
    Dump {
        #[arg(long)]
        example: Example,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check Ω(γ) = Ω(−γ) and, if supplied, the ℤ/3 action.
    Validate {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Solver settings shared by `tba solve` and `asym check`.
#[derive(Args, Clone)]
pub struct SolverArgs {
    /// Samples per ray (odd).
    #[arg(long = "N", default_value_t = 257)]
    pub n: usize,
    /// Half-width of the s-grid; automatic when omitted.
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Under-relaxation factor in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub relaxation: f64,
    /// Spectrum file; defaults to the example's built-in spectrum.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TbaCommand {
    Solve(SolveArgs),
    /// Evaluate a stored solution at another ζ.
    Eval(EvalArgs),
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Output of `tba solve`.
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long = "charge", required = true, allow_hyphen_values = true)]
    pub charges: Vec<Charge>,
    /// Phase of ζ (|ζ| = 1); defaults to the solution's ϑ.
    #[arg(long, allow_hyphen_values = true)]
    pub zeta_arg: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub zeta_abs: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AsymCommand {
    Predict(PredictArgs),
    /// Solve on an R-grid and tabulate the remainder as CSV.
    Check(CheckArgs),
}

#[derive(Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true)]
    pub charge: Charge,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true)]
    pub charge: Charge,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long = "R-grid", value_delimiter = ',', default_value = "1,1.5,2,2.5,3")]
    pub r_grid: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PolygonCommand {
    Eval(PolygonArgs),
}

#[derive(Args)]
pub struct PolygonArgs {
    /// A built-in name such as `pentagon:gamma1`, or a monomial like `p(1,2,3) p(1,3,5)^-1 ...`.
    #[arg(long)]
    pub expr: String,
    /// JSON list of homogeneous 3-vectors.
    #[arg(long)]
    pub vertices: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReproduceArgs {
    pub example: Example,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 1 when any check fails.
    #[arg(long)]
    pub strict: bool,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Periods(a) => commands::periods(a),
        Command::Network(NetworkCommand::Trace(a)) => commands::network_trace(a),
        Command::Network(NetworkCommand::Sweep(a)) => commands::network_sweep(a),
        Command::Network(NetworkCommand::Bps(a)) => commands::network_bps(a),
        Command::Bps(BpsCommand::Dump { example, out }) => commands::bps_dump(example, out),
        Command::Bps(BpsCommand::Validate { spectrum, out }) => commands::bps_validate(spectrum, out),
        Command::Tba(TbaCommand::Solve(a)) => commands::tba_solve(a),
        Command::Tba(TbaCommand::Eval(a)) => commands::tba_eval(a),
        Command::Asym(AsymCommand::Predict(a)) => commands::asym_predict(a),
        Command::Asym(AsymCommand::Check(a)) => commands::asym_check(a),
        Command::Polygon(PolygonCommand::Eval(a)) => commands::polygon_eval(a),
        Command::Reproduce(a) => reproduce::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
