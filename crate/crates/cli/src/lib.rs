//! Command-line front end: `build`, `query`, `eval` and `stats`.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hopgraph::evalkit::DatasetFormat;

pub use config::AppConfig;
pub use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "hopgraph",
    version,
    about = "Build, query and evaluate passage graphs for multi-hop retrieval"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "HOPGRAPH_CONFIG")]
    pub config: Option<PathBuf>,

    /// Log filter, e.g. `info` or `hopgraph=debug`. `RUST_LOG` takes precedence.
    #[arg(long, global = true)]
    pub log_level: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a graph archive from a corpus.
    Build(BuildArgs),
    /// Retrieve passages for a question.
    Query(QueryArgs),
    /// Evaluate retrieval (and optionally answers) on a dataset.
    Eval(EvalArgs),
    /// Print graph statistics.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Corpus file (JSON Lines or JSON array of passages).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Archive to write.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Where to save the build report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Log every chat exchange to this JSON Lines file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Print the planned number of provider calls and exit.
    #[arg(long)]
    pub dry_run: bool,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    pub question: String,
    /// Graph archive; defaults to `paths.graph` from the config.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Number of seed edges and of passages returned.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Maximum number of hop rounds.
    #[arg(long)]
    pub n_hop: Option<usize>,
    /// Follow the most similar edge instead of asking the chat model.
    #[arg(long)]
    pub no_llm: bool,
    /// Never stop a walk when the reasoner answers `none`.
    #[arg(long)]
    pub strict: bool,
    /// Write the traversal trace and chat exchanges as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Graph archive; defaults to `paths.graph` from the config.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Dataset with questions, answers and supporting passage ids.
    #[arg(long)]
    pub dataset: PathBuf,
    /// auto, native, jsonl, hotpot (also 2wiki) or musique.
    #[arg(long)]
    pub format: Option<DatasetFormat>,
    /// Comma-separated list; every combination with --n-hop is evaluated.
    #[arg(long, value_delimiter = ',')]
    pub top_k: Vec<usize>,
    /// Comma-separated list of hop counts.
    #[arg(long, value_delimiter = ',')]
    pub n_hop: Vec<usize>,
    /// Follow the most similar edge instead of asking the chat model.
    #[arg(long)]
    pub no_llm: bool,
    /// Never stop a walk when the reasoner answers `none`.
    #[arg(long)]
    pub strict: bool,
    /// Generate answers and report EM and F1.
    #[arg(long)]
    pub generate: bool,
    /// Evaluate only the first N examples.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Directory for per-setting and combined reports.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Graph archive; defaults to `paths.graph` from the config.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

fn init_logging(cli_level: Option<&str>, cfg_level: &str) {
    let filter = std::env::var("RUST_LOG")
        .ok()
        .filter(|v| !v.is_empty())
        .or_else(|| cli_level.map(str::to_string))
        .unwrap_or_else(|| cfg_level.to_string());
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::new(filter))
        .with_writer(std::io::stderr)
        .without_time()
        .try_init();
}

/// Runs a parsed command, writing results to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = AppConfig::load_or_default(cli.config.as_deref())?;
    cfg.apply_env();
    init_logging(cli.log_level.as_deref(), &cfg.logging.level);
    cfg.validate()?;
    match cli.command {
        Command::Build(a) => commands::build(&cfg, a, out),
        Command::Query(a) => commands::query(&cfg, a, out),
        Command::Eval(a) => commands::eval(&cfg, a, out),
        Command::Stats(a) => commands::stats(&cfg, a, out),
    }
}

/// Parses `args` and runs the command against stdout.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                error::EXIT_USAGE
            } else {
                error::EXIT_OK
            });
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
