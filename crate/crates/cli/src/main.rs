//! `dbarlab`: solve, certify, scan and self-test from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use dbarlab::selftest::SelftestOptions;
use serde::de::DeserializeOwned;
use serde::Serialize;

use dbarlab_cli::commands;
use dbarlab_cli::config::{load, CertifyConfig, KrScanConfig, OdeConfig, SolveConfig};

#[derive(Debug, Parser)]
#[command(name = "dbarlab", version, about = "Experiments with the equation df/dz-bar = |f|^(1/2)")]
struct Cli {
    /// JSON config for the subcommand; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overridden by DBARLAB_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print the effective config and exit.
    #[arg(long, global = true)]
    print_config: bool,

    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the equation on a disc with a prescribed value at the origin.
    SolveDbar,
    /// Run the lemma certificates on a stored field.
    Certify {
        /// Field file written by `solve-dbar`.
        solution: Option<PathBuf>,
    },
    /// Scan graph discs over radii and report the semicontinuity gap.
    KrScan,
    /// Integrate the scalar model g' = |g|^(1/2).
    Ode,
    /// Run the invariant suite and print a pass/fail table.
    Selftest,
}

fn out_dir(cli: &Cli) -> PathBuf {
    std::env::var_os("DBARLAB_OUT")
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .unwrap_or_else(|| PathBuf::from("dbarlab-out"))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    print!("{}", dbarlab::io::to_json(value)?);
    Ok(())
}

fn config_for<T: DeserializeOwned + Default>(cli: &Cli) -> Result<T> {
    load(cli.config.as_deref())
}

fn run(cli: &Cli) -> Result<bool> {
    rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    let out = out_dir(cli);
    match &cli.command {
        Command::SolveDbar => {
            let cfg: SolveConfig = config_for(cli)?;
            if cli.print_config {
                print_json(&cfg)?;
                return Ok(true);
            }
            let rec = commands::solve_dbar(&cfg, &out)?;
            print_json(&rec.summary)?;
        }
        Command::Certify { solution } => {
            let cfg: CertifyConfig = config_for(cli)?;
            if cli.print_config {
                print_json(&cfg)?;
                return Ok(true);
            }
            let path = solution
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("certify needs a solution file"))?;
            let rec = commands::certify(&cfg, path, &out)?;
            print_json(&rec.summary)?;
        }
        Command::KrScan => {
            let cfg: KrScanConfig = config_for(cli)?;
            if cli.print_config {
                print_json(&cfg)?;
                return Ok(true);
            }
            let rec = commands::kr_scan(&cfg, &out)?;
            print_json(&rec.summary)?;
        }
        Command::Ode => {
            let cfg: OdeConfig = config_for(cli)?;
            if cli.print_config {
                print_json(&cfg)?;
                return Ok(true);
            }
            let rec = commands::ode(&cfg, &out)?;
            print_json(&rec.summary)?;
        }
        Command::Selftest => {
            let cfg: SelftestOptions = config_for(cli)?;
            if cli.print_config {
                print_json(&cfg)?;
                return Ok(true);
            }
            let (_, all) = commands::selftest(&cfg, &out)?;
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
