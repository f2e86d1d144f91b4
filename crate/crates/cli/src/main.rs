use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Feasibility of (T, S, P) statistics for postselected measurements.
///
/// Exit status: 0 feasible/success, 1 negative result (infeasible, violation,
/// deviation), 2 invalid input.
#[derive(Debug, Parser)]
#[command(name = "postselect", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a scenario is reachable.
    Check {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Allow general measurements instead of projective ones.
        #[arg(long)]
        generalized: bool,
    },
    /// Build a witness for a scenario and emit it as JSON.
    Construct {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = Kind::Projective)]
        kind: Kind,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the statistics of a witness file.
    Verify { path: PathBuf },
    /// Sample a feasibility region on a grid and write it as CSV.
    Region(RegionArgs),
    /// Sample random projective models and check them.
    Fuzz(FuzzArgs),
    /// Diversity indices and Renyi entropies of a distribution.
    Entropy {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        p: Vec<f64>,
        /// Orders to report, comma separated; `inf` is accepted.
        #[arg(long, value_delimiter = ',', value_parser = parse_order)]
        q: Vec<f64>,
    },
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Transition probability T = |<phi|psi>|^2.
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Postselection success probability S.
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    /// Outcome distribution, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Projective,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Ternary,
    Ps,
    Pt,
    Ts,
}

#[derive(Debug, Args)]
struct RegionArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    /// Number of outcomes (ts).
    #[arg(long)]
    n: Option<usize>,
    /// Fixed success probability (pt).
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FuzzArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    outcomes: usize,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw phi orthogonal to psi.
    #[arg(long)]
    orthogonal: bool,
}

fn parse_order(s: &str) -> Result<f64, String> {
    let q = match s.trim() {
        "inf" | "infinity" => f64::INFINITY,
        other => other.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if q.is_nan() || q < 0.0 {
        return Err(format!("order must be non-negative, got {s}"));
    }
    Ok(q)
}

/// Terminal state of a command.
#[derive(Debug)]
pub enum Failure {
    /// Well-formed input with a negative answer.
    Negative(String),
    /// Malformed input.
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Negative(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("POSTSELECT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("POSTSELECT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<String, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Check { scenario, generalized } => commands::check(&scenario, generalized),
        Command::Construct { scenario, kind, out } => commands::construct(&scenario, kind, out.as_deref()),
        Command::Verify { path } => commands::verify(&path),
        Command::Region(args) => commands::region(&args),
        Command::Fuzz(args) => commands::fuzz(&args),
        Command::Entropy { p, q } => commands::entropy(&p, &q),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let code = failure.code();
            match failure {
                // negative results still carry a full report
                Failure::Negative(report) => print!("{report}"),
                Failure::Input(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(code)
        }
    }
}
