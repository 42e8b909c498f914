//! Command line entry point. Exit codes: 0 success, 1 configuration or
//! usage error, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use quantlink_cli::config::{self, ExperimentConfig};
use quantlink_cli::error::{CliError, CliResult};
use quantlink_cli::experiments::run_experiment;

#[derive(Parser)]
#[command(name = "quantlink", version, about = "Low-resolution ADC receiver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a TOML config and write a CSV table.
    Run {
        /// Path to the experiment config file.
        config: Option<PathBuf>,
        /// Destination CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's random seed.
        #[arg(long)]
        seed: Option<i64>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Print a fully populated default config and exit.
        #[arg(long)]
        print_defaults: bool,
    },
}

fn run(
    config_path: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<i64>,
    trials: Option<u64>,
    print_defaults: bool,
) -> CliResult<()> {
    if print_defaults {
        print!("{}", config::default_config_text());
        return Ok(());
    }
    let config_path = config_path
        .ok_or_else(|| CliError::Validation("missing config file argument".into()))?;
    let out = out.ok_or_else(|| CliError::Validation("missing --out <csv-path>".into()))?;

    let text = std::fs::read_to_string(&config_path).map_err(|e| {
        CliError::Validation(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let mut cfg: ExperimentConfig = config::parse_toml(&text)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    config::validate(&cfg)?;

    let table = run_experiment(&cfg)?;
    let n_rows = table.rows.len();
    std::fs::write(&out, table.to_csv_bytes()?)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {} ({n_rows} rows)", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Some(Command::Run { config, out, seed, trials, print_defaults }) = cli.command else {
        let _ = Cli::command().print_help();
        return ExitCode::from(1);
    };
    match run(config, out, seed, trials, print_defaults) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
