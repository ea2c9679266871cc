//! `dog-lcu`: kernel tables, transfer functions, circuit verification and
//! convergence sweeps for the DoG block encoding.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
//! 3 I/O failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "dog-lcu", version, about = "DoG operator block encoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Raise log verbosity (-v, -vv)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write kernel.csv and report sum|c_t|, C_DoG and the lambda check
    Kernel,
    /// Write the transfer function for every grid size
    Spectrum,
    /// Check unitarity, block identity, Hermiticity, Parseval and loader precision
    Verify {
        /// Tilt p so that the operator is no longer Hermitian
        #[arg(long)]
        inject_asymmetry: bool,
    },
    /// Success-probability convergence over the grid sizes
    Sweep,
    /// Print the resolved configuration as TOML
    Config,
}

fn resolve(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&cli.overrides);
    if let Command::Verify { inject_asymmetry: true } = cli.command {
        cfg.inject_asymmetry = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<bool> {
    let cfg = resolve(cli)?;
    match cli.command {
        Command::Kernel => commands::kernel(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Verify { .. } => commands::verify(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
