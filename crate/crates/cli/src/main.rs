use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rmwalk_cli::{run_scenario, CliError, OutputFormat, Overrides, RunConfig, RunStatus, Scenario, SEED_ENV};

/// Random-matrix Schrödinger walk simulator.
///
/// Every key of the TOML config has a default; `rmwalk print-defaults`
/// prints them all. Unknown keys are rejected. The master seed is taken from
/// --seed, then the config file, then the RMWALK_SEED environment variable,
/// then 0.
///
/// Exit status: 0 success, 1 I/O failure, 2 invalid configuration, 3 result
/// statistically invalidated (for example too many timed-out runs).
#[derive(Parser)]
#[command(name = "rmwalk", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed (overrides the config file and RMWALK_SEED).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Output directory [default: rmwalk-out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Result file formats [default: both].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Override one config key, e.g. `--set born.n_runs=500`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo scenarios.
    Simulate {
        #[arg(value_enum)]
        kind: SimKind,
    },
    /// Deterministic checks against closed forms.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
    },
    /// Order-of-magnitude environmental estimates.
    Estimate,
    /// Print the full default configuration as TOML.
    PrintDefaults,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimKind {
    Born,
    Survival,
    Trajectory,
    Renewal,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Geometry,
    Velocity,
    Gue,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

fn scenario(command: &Command) -> Option<Scenario> {
    Some(match command {
        Command::Simulate { kind } => match kind {
            SimKind::Born => Scenario::Born,
            SimKind::Survival => Scenario::Survival,
            SimKind::Trajectory => Scenario::Trajectory,
            SimKind::Renewal => Scenario::Renewal,
        },
        Command::Check { kind } => match kind {
            CheckKind::Geometry => Scenario::GeometryCheck,
            CheckKind::Velocity => Scenario::VelocityDecomposition,
            CheckKind::Gue => Scenario::GueStats,
        },
        Command::Estimate => Scenario::Estimate,
        Command::PrintDefaults => return None,
    })
}

fn run(cli: Cli) -> Result<RunStatus, CliError> {
    let Some(scenario) = scenario(&cli.command) else {
        print!("{}", RunConfig::defaults_toml());
        return Ok(RunStatus::Ok);
    };
    let text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| CliError::Validation {
            key: "--config".into(),
            reason: format!("{}: {e}", path.display()),
        })?),
        None => None,
    };
    let overrides = Overrides {
        scenario: Some(scenario),
        seed: cli.seed,
        workers: cli.workers,
        output_dir: cli.out,
        format: cli.format.map(|f| match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Both => OutputFormat::Both,
        }),
        set: cli.set,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = RunConfig::resolve(text.as_deref(), &overrides, env_seed.as_deref())?;
    let outcome = run_scenario(&cfg)?;
    eprintln!(
        "{}: {} files in {}",
        cfg.scenario.name(),
        outcome.manifest.files.len(),
        outcome.output_dir.display()
    );
    Ok(outcome.status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(RunStatus::Ok) => ExitCode::SUCCESS,
        Ok(RunStatus::Invalidated { key, reason }) => {
            eprintln!("rmwalk: result invalidated (`{key}`): {reason}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("rmwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
