use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk::experiment::{self, Command, ExperimentError, SEED_ENV};

/// Decoherent quantum walk experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Closed-form spreading rate over a (theta, p) grid.
    AnalyticSweep(Common),
    /// Simulated spreading rate over a (theta, p) grid.
    SimSweep(Common),
    /// Purity decay for a single (theta, p).
    Purity(Common),
    /// Simulation against the closed form; exits 3 past the tolerance.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides the config file and QWALK_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(command: Command, args: Common) -> Result<experiment::RunOutcome, ExperimentError> {
    let text = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            ExperimentError::Config(format!("cannot read {}: {e}", path.display()))
        })?),
        None => None,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut overrides = args.overrides.clone();
    if let Some(dir) = &args.out_dir {
        overrides.push(format!("out_dir={}", dir.display()));
    }
    if let Some(w) = args.workers {
        overrides.push(format!("workers={w}"));
    }
    let config = experiment::resolve_config(
        command,
        text.as_deref(),
        env_seed.as_deref(),
        overrides.iter().map(String::as_str),
        args.seed,
    )?;
    experiment::run(command, &config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::AnalyticSweep(a) => (Command::AnalyticSweep, a),
        Sub::SimSweep(a) => (Command::SimSweep, a),
        Sub::Purity(a) => (Command::Purity, a),
        Sub::Compare(a) => (Command::Compare, a),
    };
    match run(command, args) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(d) = outcome.max_deviation {
                eprintln!("max relative deviation {d:.4}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qwalk {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
