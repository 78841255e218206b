use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{AppConfig, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] clinicsum_core::Error),
    /// Several items failed; each message was already reported.
    #[error("{0} item(s) failed")]
    Batch(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) | CliError::Batch(_) => 2,
        }
    }
}

/// Retrieval-filtered SOAP summarization of clinical conversations.
#[derive(Debug, Parser)]
#[command(name = "clinicsum", version)]
struct Cli {
    /// TOML config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for per-transcript commands.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Seed for anything randomized (required by review-sheet).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split transcripts into sentences and write one index file each.
    Index(commands::IndexArgs),
    /// Run hybrid retrieval and write the filtered context per transcript.
    Retrieve(commands::RetrieveArgs),
    /// Filter, prompt the generator and write one SOAP summary per transcript.
    Summarize(commands::SummarizeArgs),
    /// Score candidate summaries against reference summaries.
    Evaluate(commands::EvaluateArgs),
    /// Corpus statistics for transcripts or dataset pairs.
    Stats(commands::StatsArgs),
    /// Build a blinded A/B review sheet and its key.
    ReviewSheet(commands::ReviewSheetArgs),
    /// Win rates and inter-rater agreement from collected preferences.
    Irr(commands::IrrArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let cfg = AppConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let ctx = commands::Context {
        cfg,
        pool,
        seed: cli.seed,
    };
    match cli.command {
        Command::Index(a) => commands::index(&ctx, a),
        Command::Retrieve(a) => commands::retrieve(&ctx, a),
        Command::Summarize(a) => commands::summarize(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
        Command::Stats(a) => commands::stats(&ctx, a),
        Command::ReviewSheet(a) => commands::review_sheet(&ctx, a),
        Command::Irr(a) => commands::irr(&ctx, a),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
