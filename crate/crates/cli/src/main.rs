//! `wbctl`: run scenarios, analyze recordings and check model invariants.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical failure.

mod analyze;
mod failure;
mod selftest;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "wbctl",
    version,
    about = "Whole-body impedance control simulator and analysis tools",
    arg_required_else_help = true,
    after_help = "Set WBCTL_LOG (error, warn, info, debug, trace) for diagnostics on stderr."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file; writes trace.csv and summary.json.
    Simulate {
        /// Scenario TOML file.
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the bundled guidance scenario (admittance on, grasp, locomotion, push).
    Phase1 {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the bundled painting scenario (manipulation, two wall strokes).
    Phase2 {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare a recording with assistance against one without.
    Analyze(analyze::AnalyzeArgs),
    /// Run the model and controller invariant suite.
    Selftest(selftest::SelftestArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override a scenario entry, e.g. `eta_b=5` or `gains.k_cart.0=300`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Comma-separated trace columns to write (default: all).
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Seed for the initial-state jitter.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WBCTL_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => Failure::USAGE_CODE.into(),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wbctl: {f}");
            f.code().into()
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { scenario, run } => {
            let s = wbctl_core::Scenario::load(&scenario)?;
            simulate::execute(s, &run)
        }
        Command::Phase1 { run } => simulate::execute(wbctl_core::sim::bundled_scenario("phase1")?, &run),
        Command::Phase2 { run } => simulate::execute(wbctl_core::sim::bundled_scenario("phase2")?, &run),
        Command::Analyze(args) => analyze::execute(&args),
        Command::Selftest(args) => selftest::execute(&args),
    }
}
