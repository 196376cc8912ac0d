//! `qot`: classical and quantum quadratic transport between coherent-state
//! ensembles.
//!
//! Exit status is 0 on success, 1 when a verification fails and 2 when the
//! input is unusable. Set `QOT_LOG` (e.g. `QOT_LOG=debug`) for diagnostics.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "qot",
    version,
    about = "Quadratic optimal transport, classical and quantum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical W2^2 between the two point measures
    W2(W2Args),
    /// Quantum MK2^2 between the two density matrices, with certificate
    Mk2(Mk2Args),
    /// Two symmetric pairs with equal masses
    EqualMass(EqualMassArgs),
    /// Unequal masses at the same two points
    UnequalMass(UnequalMassArgs),
    /// Grid over scenario parameters, written as CSV
    Sweep(SweepArgs),
    /// Husimi W2^2 against MK2^2 + 4 hbar
    HusimiBound(HusimiArgs),
    /// Run the self-check suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON file with both configurations, or give the flag twice
    #[arg(long = "config", required = true, num_args = 1)]
    configs: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pivot {
    Bland,
    BlockSearch,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct W2Args {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value = "bland")]
    pivot: Pivot,
    /// Write the optimal plan as CSV
    #[arg(long)]
    plan_csv: Option<PathBuf>,
    /// Write the cost matrix as CSV
    #[arg(long)]
    cost_csv: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// ADMM stopping tolerance
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iterations: usize,
    /// Largest certified upper - lower gap accepted as verified
    #[arg(long, default_value_t = 1e-6)]
    gap_tolerance: f64,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct Mk2Args {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the ADMM iteration trace as CSV
    #[arg(long)]
    trace_csv: Option<PathBuf>,
    /// Write the optimal coupling as JSON
    #[arg(long)]
    coupling_json: Option<PathBuf>,
    /// Write the dual witness as JSON
    #[arg(long)]
    witness_json: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct EqualMassArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    hbar: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct UnequalMassArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    hbar: f64,
    /// Weight of the correction added to the quantized classical plan
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    EqualMass,
    UnequalMass,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioKind,
    /// Comma-separated values
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<f64>,
    /// Half-distance of the second pair (equal masses)
    #[arg(long, value_delimiter = ',')]
    b: Vec<f64>,
    /// Mass imbalance (unequal masses)
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    hbar: Vec<f64>,
    /// Correction weights (unequal masses); default min(0.01, max feasible / 2)
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Output file; standard output when absent
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct HusimiArgs {
    /// Configuration pair; the equal-mass scenario from --a/--b/--hbar otherwise
    #[arg(long = "config", num_args = 1, conflicts_with_all = ["a", "b", "hbar"])]
    configs: Vec<PathBuf>,
    #[arg(long, requires_all = ["b", "hbar"])]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    center_q: f64,
    #[arg(long, default_value_t = 0.0)]
    center_p: f64,
    #[arg(long, default_value_t = 8.0)]
    half_width: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, default_value_t = 1e-12)]
    mass_cutoff: f64,
    #[arg(long, default_value_t = 2e-2)]
    refinement_tolerance: f64,
    #[arg(long, default_value_t = 1600)]
    max_support: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Emit the outcomes as JSON
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QOT_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::W2(args) => commands::w2(args),
        Command::Mk2(args) => commands::mk2(args),
        Command::EqualMass(args) => commands::equal_mass(args),
        Command::UnequalMass(args) => commands::unequal_mass(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::HusimiBound(args) => commands::husimi_bound(args),
        Command::Verify(args) => commands::verify(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qot: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
