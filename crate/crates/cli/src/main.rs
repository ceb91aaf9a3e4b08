use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod intermediate;
mod meta;
mod plan;
mod provider;
mod pseudo;
mod score;

/// Multi-dimensional text evaluation as Boolean question answering.
#[derive(Debug, Parser)]
#[command(name = "booleval", version, args_override_self = true)]
pub struct Cli {
    /// TOML file whose `[<subcommand>]` table supplies default flags.
    /// Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build balanced positive/negative samples from a corpus.
    MakePseudo(pseudo::MakePseudoArgs),
    /// Convert intermediate-task datasets into one shuffled mix.
    ConvertIntermediate(intermediate::ConvertArgs),
    /// Score instances with a probability provider.
    Score(score::ScoreArgs),
    /// Correlate metric scores with human judgements.
    MetaEval(meta::MetaEvalArgs),
    /// Plan training shards and optionally write them.
    Plan(plan::PlanArgs),
}

/// Shared scoring flags.
#[derive(Debug, Args, Clone)]
pub struct ProviderArgs {
    /// `http://host:port`, `mock` or `oracle:<samples.jsonl>`.
    #[arg(long, env = "BOOLEVAL_PROVIDER")]
    provider: Option<String>,
    /// Inputs per provider request.
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    /// Concurrent provider requests.
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    /// Attempts per request for http providers.
    #[arg(long, default_value_t = 3)]
    retries: u32,
    /// Request timeout in seconds for http providers.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
}

/// Outcome of a command that may fail part way.
pub enum Status {
    Clean,
    Partial(usize),
    Failed(usize),
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = Cli::parse_from(argv);
    let result = match cli.command {
        Command::MakePseudo(a) => pseudo::run(a),
        Command::ConvertIntermediate(a) => intermediate::run(a),
        Command::Score(a) => score::run(a),
        Command::MetaEval(a) => meta::run(a),
        Command::Plan(a) => plan::run(a),
    };
    match result {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::Partial(n)) => {
            eprintln!("{n} error(s)");
            ExitCode::from(2)
        }
        Ok(Status::Failed(n)) => {
            eprintln!("failed: {n} error(s), nothing produced");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
}
