mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use render::Format;

const DEFAULT_SEED: &str = "2024";

#[derive(Parser)]
#[command(name = "dowry", version, about = "Optimal multi-selection secretary strategies")]
struct Cli {
    /// Output format; `tree` accepts only dot and json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArgs {
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,

    #[arg(long, env = "DOWRY_SEED", default_value = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal thresholds and exact win probability for n applicants and s selections.
    Thresholds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
    },
    /// Exact win probability of an explicit (k_1,...,k_s) strategy.
    Winprob {
        #[arg(long)]
        n: usize,
        /// Thresholds in interview order, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
    },
    /// Limiting threshold ratios and success probabilities as n grows.
    Asymptotic {
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = dowry_core::asymptotic::DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Monte Carlo win rate and expected stopping ratio.
    Simulate {
        #[arg(long)]
        n: usize,
        /// Use the optimal thresholds for s selections.
        #[arg(long, conflicts_with = "k", required_unless_present = "k")]
        s: Option<usize>,
        /// Explicit thresholds in interview order, comma separated.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value = "both")]
        model: commands::ModelChoice,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Expected stopping ratio of the optimal strategy for s = 1..s-max under both models.
    EsrSweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s_max: usize,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Export the annotated prefix tree with the optimal strike set marked.
    Tree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
    },
    /// Cross-check every exact module against brute-force enumeration.
    Verify {
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        s_max: usize,
    },
}

pub enum Failure {
    Usage(String),
    Computation(String),
}

impl From<dowry_core::Error> for Failure {
    fn from(e: dowry_core::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Computation(e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let format = cli.format;
    let table = format.unwrap_or(Format::Table);
    let (bytes, ok) = match cli.command {
        Command::Thresholds { n, s } => (render(commands::thresholds(n, s)?, table)?, true),
        Command::Winprob { n, k } => (render(commands::winprob(n, &k)?, table)?, true),
        Command::Asymptotic { s, tolerance } => {
            (render(commands::asymptotic(s, tolerance)?, table)?, true)
        }
        Command::Simulate { n, s, k, model, seed } => {
            let report = commands::simulate(n, s, k.as_deref(), model, seed.trials, seed.seed)?;
            (render(report, table)?, true)
        }
        Command::EsrSweep { n, s_max, seed } => (
            render(commands::esr_sweep(n, s_max, seed.trials, seed.seed)?, table)?,
            true,
        ),
        Command::Tree { n, s } => (commands::tree(n, s, format.unwrap_or(Format::Dot))?, true),
        Command::Verify { n_max, s_max } => {
            let (report, passed) = commands::verify(n_max, s_max)?;
            (render(report, table)?, passed)
        }
    };
    match cli.output {
        Some(path) => std::fs::write(&path, &bytes)
            .map_err(|e| Failure::Computation(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::Computation(e.to_string()))?,
    }
    Ok(ok)
}

fn render(report: render::Report, format: Format) -> Result<Vec<u8>, Failure> {
    report.render(format).map_err(Failure::Usage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
