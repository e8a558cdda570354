//! `nrmhd`: generate family data, run solves and experiments, evaluate norms.
//!
//! Exit codes: 0 success, 1 failed assertions or other errors, 2 invalid
//! configuration or arguments, 3 blow-up or CFL violation, 4 I/O or malformed
//! input files.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nrmhd::Error;

use commands::{Experiment, Failure, Kind};
use config::{ConfigError, RunConfig, CONFIG_KEYS};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "nrmhd", version, about = "Spectral laboratory for non-resistive MHD", after_long_help = CONFIG_KEYS)]
struct Cli {
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set grid.N=256` or `--set experiment.n_list=[4,8]`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write family initial data `u0.mhdf`, `b0.mhdf` and `family.json`.
    Generate,
    /// Solve from MHDF1 files or from the configured family; writes `series.csv` and final states.
    Simulate {
        #[arg(long, requires = "b0")]
        u0: Option<PathBuf>,
        #[arg(long, requires = "u0")]
        b0: Option<PathBuf>,
    },
    /// Print the norm of an MHDF1 field file as JSON.
    Norm {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "hs")]
        kind: Kind,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
        /// Summation index of the Besov norm; `inf` allowed.
        #[arg(long, default_value_t = 2.0)]
        r: f64,
    },
    /// Run one experiment; writes `<name>.csv` and `<name>.json`.
    Experiment {
        #[arg(value_enum)]
        name: Experiment,
        /// Exit 1 when an assertion of the report fails.
        #[arg(long)]
        check: bool,
    },
    /// Run the acceptance checks; writes `verify.json`, exits 1 unless all pass.
    Verify {
        /// Overrides `experiment.profile`.
        #[arg(long, value_parser = ["reduced", "full"])]
        profile: Option<String>,
    },
    /// Print the effective configuration as JSON.
    Config,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidGrid(_) | Error::InvalidParams(_) | Error::SupportOverflow { .. } => 2,
        Error::BlowUp(_) | Error::Cfl { .. } => 3,
        Error::Io { .. } | Error::Format { .. } | Error::Table { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.overrides.clone();
    if let Command::Verify { profile: Some(p) } = &cli.command {
        overrides.push(format!("experiment.profile={p}"));
    }
    let config = match RunConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(ConfigError::Io(msg)) => {
            eprintln!("error: cannot read config: {msg}");
            return ExitCode::from(4);
        }
        Err(ConfigError::Invalid(msg)) => {
            eprintln!("error: invalid configuration:\n{msg}");
            return ExitCode::from(2);
        }
    };
    let mut strict = true;
    let outcome = match &cli.command {
        Command::Generate => commands::generate(&config),
        Command::Simulate { u0, b0 } => commands::simulate(&config, u0.as_deref(), b0.as_deref()),
        Command::Norm { file, kind, s, r } => commands::norm(file, *kind, *s, *r).and_then(|rep| {
            println!("{}", serde_json::to_string_pretty(&rep).map_err(Error::from)?);
            Ok(())
        }),
        Command::Experiment { name, check } => {
            strict = *check;
            commands::experiment(&config, *name)
        }
        Command::Verify { .. } => commands::verify(&config),
        Command::Config => {
            println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid configuration:\n{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if let Error::BlowUp(report) = &e {
                eprintln!("{}", serde_json::to_string_pretty(report).unwrap_or_default());
            }
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Checks(failed)) => {
            for f in &failed {
                eprintln!("FAIL: {f}");
            }
            if strict {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
