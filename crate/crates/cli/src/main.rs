//! `csbp-lab`: configuration-driven experiment harness for the `csbp`
//! library.

mod commands;
mod config;
mod ensemble;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Direction;
use config::ExperimentConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "csbp-lab", version, about = "Lamperti transform laboratory")]
struct Cli {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `run.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `run.threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the effective config, defaults included, and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an ensemble and write it with its manifest.
    Simulate,
    /// Apply L or L⁻¹ to a stored ensemble.
    Transform {
        /// Ensemble directory or manifest file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
    },
    /// Tabulate the flow u_t(λ) of the configured mechanism.
    Flow,
    /// Run a verification suite (or `all`); exit status 1 on failure.
    Verify { suite: String },
    /// Convert an ensemble, flow table or example1 report to a plot series.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
    },
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.run.out = out.clone();
    }
    if let Some(threads) = cli.threads {
        cfg.run.threads = threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = effective_config(&cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(true);
    }
    let command = cli
        .command
        .ok_or_else(|| CliError::Usage("a subcommand is required (see --help)".into()))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let message = match command {
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Transform { input, direction } => commands::transform_cmd(&cfg, &input, direction)?,
        Command::Flow => commands::flow(&cfg)?,
        Command::Verify { suite } => return commands::verify(&cfg, &suite),
        Command::Plotdata { input } => commands::plotdata(&cfg, &input)?,
    };
    println!("{message}");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("csbp-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
