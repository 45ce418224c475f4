//! `cbnsem`: exact, oracle and estimated evaluation of formulas over causal
//! Bayesian networks.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cbnsem::{QueryKind, DEFAULT_CAP};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cbnsem", version, about = "Probabilities of counterfactual formulas over causal Bayesian networks")]
pub struct Cli {
    /// Network file in cbn/1 JSON.
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<PathBuf>,

    /// Bound on enumerated selections, contexts or expansion terms.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: u64,

    #[arg(long, global = true, value_enum, default_value_t = OutputMode::Human)]
    pub output: OutputMode,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Human,
    /// One JSON object per line.
    Records,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact probability of a formula, optionally conditioned on another.
    Eval(FormulaArgs),
    /// PN, PS or PNS through the closed forms, optionally estimated from data.
    Counterfactual(CounterfactualArgs),
    /// Compile to a functional model and write it as fcm/1 JSON.
    Compile {
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Draw rows from the compiled functional model as CSV.
    Sample {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Estimate a formula or a query from a dataset.
    Estimate(EstimateArgs),
    /// Run the compatibility, independence and oracle-equivalence audits.
    Check {
        /// Random formulas compared against the oracle.
        #[arg(long, default_value_t = 25)]
        formulas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the canonical DNF of a formula and each disjunct simplified.
    Canon {
        #[arg(long)]
        formula: String,
    },
}

#[derive(Debug, Args)]
pub struct FormulaArgs {
    #[arg(long)]
    pub formula: String,
    #[arg(long)]
    pub given: Option<String>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, value_parser = parse_kind)]
    pub query: QueryKind,
    #[arg(long)]
    pub cause: String,
    #[arg(long)]
    pub effect: String,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = cbnsem::counterfactual::DEFAULT_REPLICATES)]
    pub replicates: usize,
}

#[derive(Debug, Args)]
pub struct CounterfactualArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// CSV dataset for an estimate next to the exact value.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    #[arg(long, conflicts_with_all = ["query", "cause", "effect"], required_unless_present = "query")]
    pub formula: Option<String>,
    #[arg(long, requires = "formula")]
    pub given: Option<String>,
    #[arg(long, value_parser = parse_kind, requires_all = ["cause", "effect"])]
    pub query: Option<QueryKind>,
    #[arg(long)]
    pub cause: Option<String>,
    #[arg(long)]
    pub effect: Option<String>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
}

fn parse_kind(s: &str) -> Result<QueryKind, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(err) => {
            report(&err);
            err.exit.into()
        }
    }
}

fn report(err: &CliError) {
    eprintln!("error: {}", err.message);
    for line in &err.detail {
        eprintln!("{line}");
    }
}
