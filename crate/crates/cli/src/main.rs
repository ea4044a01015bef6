use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phaselock_cli::{cmd_analyze, cmd_report, cmd_simulate, with_threads, CliError, OUT_DIR_ENV};

/// Phase-locking-value connectivity for multichannel EEG.
#[derive(Debug, Parser)]
#[command(name = "phaselock", version)]
struct Cli {
    /// Worker threads for the numeric kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic recordings and a ground-truth manifest.
    Simulate {
        /// Simulation spec (TOML).
        #[arg(long)]
        spec: PathBuf,
        /// Output directory.
        #[arg(long, env = OUT_DIR_ENV)]
        out: PathBuf,
    },
    /// Compute class tables and region reports.
    Analyze {
        /// Analysis config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the config's [output].dir.
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Print the tables written by `analyze`.
    Report {
        /// Analysis output directory.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = cli.threads;
    match cli.command {
        Command::Simulate { spec, out } => {
            let manifest = with_threads(threads, || cmd_simulate(&spec, &out))??;
            let files = match &manifest {
                phaselock_cli::Manifest::Recording(m) => &m.files,
                phaselock_cli::Manifest::Study(m) => &m.files,
            };
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Command::Analyze { config, out } => {
            let written = with_threads(threads, || cmd_analyze(&config, out.as_deref()))??;
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Report { dir } => print!("{}", cmd_report(&dir)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
