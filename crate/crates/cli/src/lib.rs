//! Batch entry points: serve the API, analyze sessions, score ratings, and
//! run the scripted pipeline.

pub mod analyze;
mod error;
pub mod mockrun;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use flexmind_api::{AppState, Store};
use flexmind_core::llm::{LiveClient, LlmClient, LlmConfig, Orchestrator, ScriptedClient, SyntheticClient};
use flexmind_core::scoring::{parse_ratings_csv, RatingReport};
use flexmind_core::{Clock, SystemClock};
use serde::Serialize;

pub use error::{kind_for, CliError, ExitKind};

#[derive(Debug, Parser)]
#[command(name = "flexmind", version, about = "FlexMind ideation workbench tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the HTTP/JSON API.
    Serve {
        /// LLM settings (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "FLEXMIND_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, env = "FLEXMIND_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Answer with the built-in synthetic model instead of a live one.
        #[arg(long, conflicts_with = "fixtures")]
        offline: bool,
        /// Answer from scripted fixtures.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Tree metrics and jumps for a session file or a directory of them.
    Analyze {
        path: PathBuf,
        /// Treat every input as a manual annotation.
        #[arg(long)]
        baseline_annotation: bool,
        /// Report path; writes `<out>.json` and `<out>.md`. Markdown goes to
        /// stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of comparisons for the Bonferroni correction.
        #[arg(long, default_value_t = 1)]
        bonferroni: usize,
    },
    /// Idea scores, ICC per dimension, Welch across conditions, bands.
    Score {
        ratings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scripted pipeline on a brief and write the project JSON.
    Mockrun {
        brief: PathBuf,
        /// Scripted LLM fixtures; the synthetic model is used when omitted.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Project JSON destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the action log (JSONL).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write prompts that have no fixture into this directory.
        #[arg(long)]
        dump_prompts: Option<PathBuf>,
        /// Overview idea to open on the canvas.
        #[arg(long)]
        seed: Option<String>,
    },
}

fn load_config(path: Option<&Path>) -> Result<LlmConfig, CliError> {
    Ok(match path {
        Some(p) => LlmConfig::load(p)?,
        None => LlmConfig::default(),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))
}

/// Writes `<out>.json` and `<out>.md` (an existing extension is replaced),
/// or prints the markdown when `out` is `None`.
pub fn emit_report(out: Option<&Path>, json: &impl Serialize, markdown: &str) -> Result<(), CliError> {
    let Some(out) = out else {
        print!("{markdown}");
        return Ok(());
    };
    let text =
        serde_json::to_string_pretty(json).map_err(|e| CliError::new(ExitKind::Internal, "Internal", e.to_string()))?;
    let json_path = out.with_extension("json");
    let md_path = out.with_extension("md");
    write_file(&json_path, &(text + "\n"))?;
    write_file(&md_path, markdown)?;
    eprintln!("wrote {} and {}", json_path.display(), md_path.display());
    Ok(())
}

pub fn score_file(path: &Path) -> Result<RatingReport, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::read(path, e))?;
    let ratings = parse_ratings_csv(file)?;
    Ok(RatingReport::build(&ratings)?)
}

fn llm_client(config: &LlmConfig, offline: bool, fixtures: Option<&Path>) -> Result<Arc<dyn LlmClient>, CliError> {
    Ok(match (offline, fixtures) {
        (true, _) => Arc::new(SyntheticClient),
        (false, Some(dir)) => Arc::new(ScriptedClient::load_dir(dir)?),
        (false, None) => Arc::new(LiveClient::from_config(config)?),
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Serve {
            config,
            data_dir,
            listen,
            offline,
            fixtures,
        } => {
            let config = load_config(config.as_deref())?;
            let client = llm_client(&config, offline, fixtures.as_deref())?;
            let clock: Arc<dyn Clock> = Arc::new(SystemClock);
            let orchestrator = Orchestrator::new(client, config, clock.clone());
            let state = AppState::new(Store::open(&data_dir)?, orchestrator, clock);
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| CliError::new(ExitKind::Internal, "Internal", e.to_string()))?;
            runtime
                .block_on(flexmind_api::serve(listen, state))
                .map_err(|e| CliError::new(ExitKind::Internal, "IoError", e.to_string()))
        }
        Command::Analyze {
            path,
            baseline_annotation,
            out,
            bonferroni,
        } => {
            let report = analyze::analyze(&path, baseline_annotation, bonferroni.max(1))?;
            emit_report(out.as_deref(), &report, &report.to_markdown())
        }
        Command::Score { ratings, out } => {
            let report = score_file(&ratings)?;
            emit_report(out.as_deref(), &report, &report.to_markdown())
        }
        Command::Mockrun {
            brief,
            fixtures,
            config,
            out,
            log,
            dump_prompts,
            seed,
        } => {
            let opts = mockrun::MockrunOptions {
                brief,
                fixtures,
                dump_prompts,
                seed,
                config: load_config(config.as_deref())?,
            };
            let (project, summary) = mockrun::mockrun(&opts)?;
            match &out {
                Some(path) => write_file(path, &project.to_json())?,
                None => println!("{}", project.to_json()),
            }
            if let Some(path) = &log {
                write_file(path, &project.log_jsonl())?;
            }
            eprintln!("{}", serde_json::to_string(&summary).expect("summary serializes"));
            Ok(())
        }
    }
}
