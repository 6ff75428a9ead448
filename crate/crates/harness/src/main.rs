//! Command-line entry point for the scenario harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use continuum_harness::config::{describe, load_scenario, Scenario, ScenarioKind};
use continuum_harness::error::{HarnessError, Result};
use continuum_harness::scenarios;

#[derive(Parser)]
#[command(
    name = "continuum",
    about = "Simulation studies and contact estimation for tendon-driven continuum segments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override (or supply) the scenario RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for reports and plot data.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for trial batches.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// One ramped-contact simulation with exact measured states.
    Simulate(RunArgs),
    /// Estimator accuracy across sensor-noise amplitudes.
    NoiseStudy(RunArgs),
    /// Randomized contact trials across proportional state-error levels.
    SweepStateError(RunArgs),
    /// Synthesize a chirp record and identify stiffness and friction.
    Calibrate(RunArgs),
    /// Two-segment arm reduced to two single-segment estimations.
    Multiseg(RunArgs),
    /// Replay a recorded trajectory through both estimators.
    Estimate {
        #[command(flatten)]
        args: RunArgs,
        /// Recorded trajectory to replay (CSV).
        #[arg(long)]
        replay: PathBuf,
    },
}

fn demand_kind(scenario: &Scenario, expected: ScenarioKind, verb: &str) -> Result<()> {
    if scenario.kind != expected {
        return Err(HarnessError::Validation(format!(
            "scenario kind '{}' does not match the '{verb}' command (expected '{}')",
            scenario.kind, expected
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let scenario = load_scenario(&args.config, args.seed)?;
            demand_kind(&scenario, ScenarioKind::NoiselessOracle, "simulate")?;
            println!("{}", describe(&scenario));
            scenarios::oracle::run(&scenario, &args.out)
        }
        Command::NoiseStudy(args) => {
            let scenario = load_scenario(&args.config, args.seed)?;
            demand_kind(&scenario, ScenarioKind::NoiseStudy, "noise-study")?;
            println!("{}", describe(&scenario));
            scenarios::noise::run(&scenario, &args.out, args.jobs)
        }
        Command::SweepStateError(args) => {
            let scenario = load_scenario(&args.config, args.seed)?;
            demand_kind(&scenario, ScenarioKind::StateErrorSweep, "sweep-state-error")?;
            println!("{}", describe(&scenario));
            scenarios::sweep::run(&scenario, &args.out, args.jobs)
        }
        Command::Calibrate(args) => {
            let scenario = load_scenario(&args.config, args.seed)?;
            demand_kind(&scenario, ScenarioKind::CalibrationSynthetic, "calibrate")?;
            println!("{}", describe(&scenario));
            scenarios::cal::run(&scenario, &args.out)
        }
        Command::Multiseg(args) => {
            let scenario = load_scenario(&args.config, args.seed)?;
            demand_kind(&scenario, ScenarioKind::MultisegLumped, "multiseg")?;
            println!("{}", describe(&scenario));
            scenarios::multiseg::run(&scenario, &args.out)
        }
        Command::Estimate { args, replay } => {
            let scenario = load_scenario(&args.config, args.seed)?;
            println!("{}", describe(&scenario));
            scenarios::replay::run(&scenario, &replay, &args.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
