use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twrn_cs_cli::config::parse_override;
use twrn_cs_cli::{cmd_selftest, cmd_sweep, cmd_trial, parse_config};

#[derive(Parser)]
#[command(
    name = "twrn-cs",
    version,
    about = "Sparse channel estimation sweeps for two-way relay networks"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for report.csv, plot.gp and run-meta.txt.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Override a configuration key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Master seed; takes precedence over `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo MSE-vs-SNR sweep.
    Sweep,
    /// Single instance with per-estimator errors.
    Trial {
        /// SNR in dB (default: first grid point).
        #[arg(long)]
        snr: Option<f64>,
    },
    /// Built-in invariant checks.
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut overrides = cli.overrides;
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Selftest { inject_fault } => cmd_selftest(inject_fault, &mut stdout),
        Command::Sweep => {
            let cfg = parse_config(cli.config.as_deref(), &overrides)?;
            cmd_sweep(&cfg, &cli.out, cli.workers, &mut stdout)?;
            Ok(true)
        }
        Command::Trial { snr } => {
            let cfg = parse_config(cli.config.as_deref(), &overrides)?;
            let snr = snr.unwrap_or(cfg.snr_grid_db[0]);
            cmd_trial(&cfg, snr, &mut stdout)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
