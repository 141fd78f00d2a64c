//! Command-line workbench: generate sampling layers, certify their frame
//! constants, fit and evaluate spherical polynomials, build and certify
//! least squares quadrature rules, and run operator-norm and convergence
//! sweeps with JSON/CSV reports.

mod commands;
mod errors;
mod formats;
mod report;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "sphlsq",
    version,
    about = "Weighted least squares approximation and quadrature on the sphere",
    after_help = "Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 file I/O error.\n\
                  Set SPHLSQ_THREADS to bound the worker threads used by grid scans."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sampling layer and write it as a layer file.
    Gen(GenArgs),
    /// Certify the frame constants A, B and condition number of a layer.
    Mz(MzArgs),
    /// Fit a spherical polynomial to samples by weighted least squares.
    Fit(FitArgs),
    /// Evaluate a stored approximant at one point or a list of points.
    Eval(EvalArgs),
    /// Derive and certify the least squares quadrature rule of a layer.
    Quad(QuadArgs),
    /// Estimate operator norms over a layer family and fit their growth.
    Lebesgue(LebesgueArgs),
    /// Convergence sweep of fitting and quadrature errors over degrees.
    Sweep(SweepArgs),
    /// Run the built-in invariant battery.
    Selftest,
}

/// Layer family selector shared by the generating commands.
#[derive(Args, Clone, Serialize)]
struct FamilyArgs {
    /// Layer family: `gauss` (exact product grid) or `fibonacci` (spiral).
    #[arg(long)]
    family: String,
    /// Oversampling factor for the fibonacci family (points = c (n+1)^2).
    #[arg(long, default_value_t = 2.0)]
    oversampling: f64,
    /// Random tangent perturbation scale; points move up to eps/(n+1).
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
    /// Seed for the perturbation streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Built-in sample source shared by `fit` and `sweep`: the zonal power-law
/// series with exactly known coefficients.
#[derive(Args, Clone, Serialize)]
struct ZonalArgs {
    /// Coefficient decay exponent of the built-in zonal test function.
    #[arg(long, default_value_t = 3.0)]
    t: f64,
    /// Truncation degree of the zonal series.
    #[arg(long, default_value_t = 128)]
    lmax: u32,
    /// Pole of the zonal series, as `x,y,z` (normalized on input).
    #[arg(long, default_value = "0,0,1")]
    pole: String,
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Layer degree.
    #[arg(long)]
    n: u32,
    /// Output layer file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct MzArgs {
    /// Input layer file.
    #[arg(long)]
    layer: PathBuf,
    /// Fitting degree to certify.
    #[arg(long)]
    n: u32,
    /// Random Rayleigh-quotient trials to run as a cross check.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    /// Seed for the trials.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct FitArgs {
    /// Input layer file.
    #[arg(long)]
    layer: PathBuf,
    /// Fitting degree.
    #[arg(long)]
    n: u32,
    /// File of sample values aligned with the layer points; when omitted
    /// the built-in zonal test function provides the samples.
    #[arg(long)]
    values: Option<PathBuf>,
    #[command(flatten)]
    zonal: ZonalArgs,
    /// Output approximant file.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON fit report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EvalArgs {
    /// Input approximant file.
    #[arg(long)]
    approx: PathBuf,
    /// Single evaluation point `x,y,z` (printed to stdout).
    #[arg(long)]
    point: Option<String>,
    /// File of points, one `x1 x2 x3` per line.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Output value file for `--points` (one value per line).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct QuadArgs {
    /// Input layer file.
    #[arg(long)]
    layer: PathBuf,
    /// Rule degree.
    #[arg(long)]
    n: u32,
    /// Output rule file.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON certification report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also apply the rule to sample values from this file.
    #[arg(long)]
    values: Option<PathBuf>,
    /// Also apply the rule to the built-in zonal test function.
    #[arg(long, default_value_t = false)]
    integrate: bool,
    #[command(flatten)]
    zonal: ZonalArgs,
}

#[derive(Args, Serialize)]
struct LebesgueArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Degrees to scan, comma separated (e.g. `4,8,16,32`).
    #[arg(long, value_name = "LIST")]
    n_list: String,
    /// Finest grid resolution; defaults to cover 40 x dim nodes per degree.
    #[arg(long)]
    grid_resolution: Option<u32>,
    /// Output JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Degrees to sweep, comma separated (e.g. `8,12,16,24,32,48,64`).
    #[arg(long, value_name = "LIST")]
    n_list: String,
    #[command(flatten)]
    zonal: ZonalArgs,
    /// Attach operator-norm estimates at this grid resolution.
    #[arg(long)]
    lebesgue_grid: Option<u32>,
    /// Output CSV of per-degree measurements.
    #[arg(long)]
    out_csv: PathBuf,
    /// Output JSON summary with fitted slopes.
    #[arg(long)]
    out_json: PathBuf,
}

fn main() {
    if let Ok(threads) = std::env::var("SPHLSQ_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("error: SPHLSQ_THREADS must be a positive integer, got `{threads}`");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Mz(args) => commands::mz(args),
        Command::Fit(args) => commands::fit(args),
        Command::Eval(args) => commands::eval(args),
        Command::Quad(args) => commands::quad(args),
        Command::Lebesgue(args) => commands::lebesgue(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Selftest => commands::selftest(),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
