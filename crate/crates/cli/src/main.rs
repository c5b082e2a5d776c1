use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nullcharge_cli::config::{self, ConformalConfig};
use nullcharge_cli::{commands, CliError, Output};

#[derive(Parser)]
#[command(name = "nullcharge", version, about = "Electrodynamics of massless point charges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Angular cutoff, overriding the configuration.
    #[arg(long, global = true, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// Suppress the summary on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Classify a field and list the admissible directions of motion.
    Eigen,
    /// Radiated energy-momentum and angular momentum of a worldline.
    Flux,
    /// Follow a charge through an external field.
    Propagate,
    /// Admissible velocities over a spatial grid (CSV).
    Map,
    /// Randomized conformal-invariance checks.
    ConformalCheck,
}

fn required(path: &Option<PathBuf>) -> Result<&Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::Input("--config is required for this command".into()))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NULLCHARGE_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("NULLCHARGE_THREADS must be a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Eigen => commands::eigen(&config::load(required(&cli.config)?)?),
        Command::Flux => {
            let path = required(&cli.config)?;
            let base = path.parent().unwrap_or(Path::new("."));
            commands::flux(&config::load(path)?, base, cli.eps)
        }
        Command::Propagate => commands::propagate_cmd(&config::load(required(&cli.config)?)?),
        Command::Map => commands::map(&config::load(required(&cli.config)?)?),
        Command::ConformalCheck => {
            let cfg = match &cli.config {
                Some(p) => config::load(p)?,
                None => ConformalConfig::default(),
            };
            commands::conformal_check(&cfg, cli.seed)
        }
    }
}

fn write_output(out: &Option<PathBuf>, body: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Input(format!("writing output: {e}"));
    match out {
        Some(path) => std::fs::write(path, body).map_err(io),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()).map_err(io)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|output| {
        write_output(&cli.out, &output.body)?;
        if !cli.quiet {
            eprintln!("{}", output.summary);
        }
        output.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
