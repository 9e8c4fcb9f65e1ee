use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hoac_cli::{cmd_roundtrip, cmd_simulate, cmd_theory, CliError, ExperimentFile};

#[derive(Parser)]
#[command(
    name = "hoac",
    version,
    about = "Hierarchical over-the-air computation experiments"
)]
struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true, env = "HOAC_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Experiment file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path; defaults to the file's `output` field, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive noiseless encode/decode check.
    Roundtrip(Io),
    /// Closed-form error probabilities and rate bounds as CSV.
    Theory(Io),
    /// Monte Carlo prefix-error estimates as CSV.
    Simulate(Io),
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let io = match &cli.command {
        Command::Roundtrip(io) | Command::Theory(io) | Command::Simulate(io) => io,
    };
    let file = ExperimentFile::from_path(&io.config)?;
    let out = io.out.clone().or_else(|| file.output.clone());
    match cli.command {
        Command::Roundtrip(_) => {
            let summary = cmd_roundtrip(&file)?;
            emit(&format!("{summary}\n"), out.as_deref())
        }
        Command::Theory(_) => emit(&cmd_theory(&file)?, out.as_deref()),
        Command::Simulate(_) => emit(&cmd_simulate(&file)?, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
