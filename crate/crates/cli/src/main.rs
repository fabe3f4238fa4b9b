mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::Utc;
use clap::{Parser, Subcommand};
use ifdma::verify::VerifyOptions;
use ifdma::waveform::DEFAULT_SEED;

use commands::{Format, UsageError};
use config::{RunConfig, UnknownKeys};
use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "ifdma", version, about = "IFDMA transceiver checks, allocation and waveform experiments")]
struct Cli {
    /// TOML run configuration with [papr] and [ber] sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration file.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads for packet simulation.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Output directory for CSV files and run.json.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the property suites.
    Verify {
        /// all, spectral, transceiver, prop2 or allocation
        #[arg(default_value = "all")]
        scope: String,
        /// Random instances per size.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Flip the twiddle sign in the transform under test.
        #[arg(long, hide = true)]
        corrupt_twiddles: bool,
    },
    /// Map subcarrier requests onto the band.
    Allocate {
        /// Band size.
        #[arg(long = "M", value_name = "M")]
        band: usize,
        /// NAME=COUNT, or a bare COUNT named A, B, C, ... by position.
        #[arg(required = true)]
        requests: Vec<String>,
        /// Mixed-radix factor ordering such as 2,3,2.
        #[arg(long)]
        plan: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// PAPR CCDF of each scheme and request size.
    Papr,
    /// Bit error rate over AWGN, with and without clipping.
    Ber,
    /// Multiplier counts of the conventional and unified designs.
    Complexity {
        #[arg(default_values_t = [16usize, 64, 1024])]
        sizes: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also list every system, link and role.
        #[arg(long)]
        scenarios: bool,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn workers(requested: Option<usize>) -> Result<usize> {
    match requested {
        Some(0) => Err(UsageError("--workers must be at least 1".into()).into()),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn experiment(cli: &Cli, name: &str) -> Result<()> {
    let started = Utc::now();
    let config = load_config(cli.config.as_deref())?;
    let seed = cli.seed.or(config.master_seed).unwrap_or(DEFAULT_SEED);
    let mut manifest = RunManifest::new(name, config.clone(), seed, workers(cli.workers)?, started);
    std::fs::create_dir_all(&cli.out).with_context(|| format!("cannot create {}", cli.out.display()))?;
    if name == "papr" {
        commands::papr_cmd(&config, &mut manifest, &cli.out)?;
    } else {
        commands::ber_cmd(&config, &mut manifest, &cli.out)?;
    }
    manifest.write(&cli.out)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Verify { scope, trials, corrupt_twiddles } => {
            let scope = commands::parse_scope(scope)?;
            let options = VerifyOptions {
                trials: *trials,
                seed: cli.seed.unwrap_or(VerifyOptions::default().seed),
                corrupt_twiddles: *corrupt_twiddles,
            };
            Ok(commands::verify(scope, &options))
        }
        Command::Allocate { band, requests, plan, format } => {
            print!("{}", commands::allocate_cmd(*band, requests, plan.as_deref(), *format)?);
            Ok(true)
        }
        Command::Papr => experiment(cli, "papr").map(|_| true),
        Command::Ber => experiment(cli, "ber").map(|_| true),
        Command::Complexity { sizes, format, scenarios } => {
            commands::check_sizes(sizes)?;
            print!("{}", commands::complexity_cmd(sizes, *format, *scenarios)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() || e.downcast_ref::<UnknownKeys>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
