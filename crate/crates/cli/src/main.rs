//! `varlen`: exact overflow/error tradeoffs of fixed-to-variable length
//! codes, swept from the command line.

mod commands;
mod config;
mod error;
mod output;

use clap::Parser;
use commands::Command;
use error::CliError;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "varlen",
    version,
    about = "Exact overflow/error tradeoffs for variable-length source codes"
)]
struct Cli {
    /// Computation to run.
    #[arg(value_enum)]
    command: Command,
    /// Source definition and default parameters (key = value lines).
    #[arg(long, global = true)]
    source: Option<PathBuf>,
    /// Block length.
    #[arg(long)]
    n: Option<String>,
    /// Block lengths: list, a..b+step or a..b*factor.
    #[arg(long = "n-grid")]
    n_grid: Option<String>,
    /// Error budget; tradeoff accepts a grid.
    #[arg(long)]
    eps: Option<String>,
    /// Overflow budget.
    #[arg(long)]
    delta: Option<String>,
    /// Length thresholds.
    #[arg(long = "eta-grid", allow_hyphen_values = true)]
    eta_grid: Option<String>,
    /// Exponent in a_n = K^(-n gamma) or K^(-sqrt(n) gamma).
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Rate for the second-order threshold; `H` means the entropy.
    #[arg(long, allow_hyphen_values = true)]
    rate: Option<String>,
    /// Seed for sampled sequences.
    #[arg(long)]
    seed: Option<String>,
    /// Output format, csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cli {
    fn flag_pairs(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        let fields = [
            ("n", &self.n),
            ("n_grid", &self.n_grid),
            ("eps", &self.eps),
            ("delta", &self.delta),
            ("eta_grid", &self.eta_grid),
            ("gamma", &self.gamma),
            ("rate", &self.rate),
            ("seed", &self.seed),
            ("format", &self.format),
        ];
        for (k, v) in fields {
            if let Some(v) = v {
                m.insert(k, v.clone());
            }
        }
        if let Some(out) = &self.out {
            m.insert("out", out.to_string_lossy().into_owned());
        }
        m
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.source {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid("source", format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let pairs = config::parse_pairs(&text)?;
    let cfg = config::build(pairs, cli.flag_pairs())?;
    let outcome = commands::run(cli.command, &cfg)?;
    match &cfg.out {
        Some(path) => output::write_atomic(path, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    match outcome.violation {
        Some(v) => Err(CliError::Theorem(v)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("varlen: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
