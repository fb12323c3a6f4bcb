//! `wikidir`: builds cross-dialect retrieval test collections from wiki dumps
//! and evaluates retrieval runs against them.
//!
//! Exit status: 0 on success, 1 when the configuration is invalid, 2 on usage
//! errors, 3 when a stage fails at run time. Failures print one
//! `ERROR code=<kind> ...` line per problem on stderr.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigError;
use crate::output::{CliError, Ctx};

#[derive(Parser)]
#[command(name = "wikidir", version, about = "Cross-dialect retrieval collection builder and evaluator")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Pipeline configuration file.
    #[arg(long, short, global = true, default_value = "wikidir.toml")]
    config: PathBuf,
    /// Override a configuration value, e.g. `--set retrieval.depth=50`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Split seed; same as `--set split.seed=N`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for labeling; same as `--set workers=N`.
    #[arg(long, global = true)]
    workers: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse dumps or line-delimited corpora into the normalized corpus.
    Ingest,
    /// Build a BM25 index from a documents file.
    BuildIndex(commands::BuildIndexArgs),
    /// Extract queries and documents, synthesize qrels and split the queries.
    MakeCollection,
    /// Mine dialect-variant candidates from anchor texts.
    MineCandidates,
    /// Serve the annotation API (and optional UI bundle) until interrupted.
    ServeAnnotation(commands::ServeArgs),
    /// Aggregate the judgment log into the dialect dictionary.
    BuildDictionary(commands::DictionaryArgs),
    /// Build the analysis split and its title-only and title+variant qrels.
    AnalysisQrels,
    /// First-stage BM25 retrieval.
    Search(commands::SearchArgs),
    /// Rerank a run through the configured reranker plugin.
    Rerank(commands::RerankArgs),
    /// Translate documents through the configured translator plugin.
    Translate(commands::TranslateArgs),
    /// Score a run with nDCG@k.
    Evaluate(commands::EvaluateArgs),
    /// Per-dialect collection statistics.
    Stats,
    /// Cohen's kappa between two annotators.
    Kappa(commands::KappaArgs),
    /// Check the configuration and report every problem.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::BuildIndex(_) => "build-index",
            Command::MakeCollection => "make-collection",
            Command::MineCandidates => "mine-candidates",
            Command::ServeAnnotation(_) => "serve-annotation",
            Command::BuildDictionary(_) => "build-dictionary",
            Command::AnalysisQrels => "analysis-qrels",
            Command::Search(_) => "search",
            Command::Rerank(_) => "rerank",
            Command::Translate(_) => "translate",
            Command::Evaluate(_) => "evaluate",
            Command::Stats => "stats",
            Command::Kappa(_) => "kappa",
            Command::Validate => "validate",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut sets = cli.global.sets;
    if let Some(seed) = cli.global.seed {
        sets.push(format!("split.seed={seed}"));
    }
    if let Some(workers) = cli.global.workers {
        sets.push(format!("workers={workers}"));
    }
    let config = config::load(&cli.global.config, std::env::vars(), &sets)?;
    for warning in &config.warnings {
        log::warn!("{warning}");
    }
    let ctx = Ctx::new(config, cli.command.name());
    match cli.command {
        Command::Ingest => commands::ingest(&ctx),
        Command::BuildIndex(args) => commands::build_index(&ctx, args),
        Command::MakeCollection => commands::make_collection(&ctx),
        Command::MineCandidates => commands::mine_candidates(&ctx),
        Command::ServeAnnotation(args) => commands::serve_annotation(&ctx, args),
        Command::BuildDictionary(args) => commands::build_dictionary(&ctx, args),
        Command::AnalysisQrels => commands::analysis_qrels(&ctx),
        Command::Search(args) => commands::search(&ctx, args),
        Command::Rerank(args) => commands::rerank(&ctx, args),
        Command::Translate(args) => commands::translate(&ctx, args),
        Command::Evaluate(args) => commands::evaluate(&ctx, args),
        Command::Stats => commands::stats(&ctx),
        Command::Kappa(args) => commands::kappa(&ctx, args),
        Command::Validate => {
            println!("ok config={}", ctx.config.hash);
            Ok(())
        }
    }
}

fn quote(message: &str) -> String {
    serde_json::to_string(message).expect("strings serialize")
}

fn report(err: &anyhow::Error) -> ExitCode {
    if let Some(ConfigError::Invalid(issues)) = err.downcast_ref::<ConfigError>() {
        for issue in issues {
            eprintln!("ERROR code=config field={} message={}", issue.field, quote(&issue.message));
        }
        return ExitCode::from(1);
    }
    if let Some(CliError::Config { field, message }) = err.downcast_ref::<CliError>() {
        eprintln!("ERROR code=config field={field} message={}", quote(message));
        return ExitCode::from(1);
    }
    eprintln!("ERROR code={} message={}", output::error_code(err), quote(&format!("{err:#}")));
    ExitCode::from(3)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => report(&err),
    }
}
