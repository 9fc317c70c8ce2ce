//! `agilekb`: validate the knowledge base, query it, compute recommendations
//! offline, or serve the HTTP API.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage or I/O error.

mod render;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use agilekb_core::kb::{KbError, KbPaths, KnowledgeBase, TeamProfile, ONTO};
use agilekb_core::Term;
use agilekb_server::ServerConfig;
use clap::{Args, Parser, Subcommand, ValueEnum};

const DEFAULT_DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");

/// The team individual used by `recommend`, fixed so output is reproducible.
const CLI_TEAM: &str = "Team_cli";

#[derive(Parser)]
#[command(name = "agilekb", version, about = "Agile practice knowledge base")]
struct Cli {
    #[command(flatten)]
    files: FileArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FileArgs {
    /// Directory holding the standard input files
    #[arg(long, global = true, env = "AGILEKB_DATA_DIR", default_value = DEFAULT_DATA_DIR)]
    data_dir: PathBuf,
    #[arg(long, global = true, env = "AGILEKB_SCHEMA")]
    schema: Option<PathBuf>,
    #[arg(long, global = true, env = "AGILEKB_ONTOLOGY")]
    ontology: Option<PathBuf>,
    #[arg(long, global = true, env = "AGILEKB_RULES")]
    rules: Option<PathBuf>,
    #[arg(long, global = true, env = "AGILEKB_CONCERNS")]
    concerns: Option<PathBuf>,
    #[arg(long, global = true, env = "AGILEKB_GOALS")]
    goals_catalog: Option<PathBuf>,
    #[arg(long, global = true, env = "AGILEKB_FACTORS")]
    factors_catalog: Option<PathBuf>,
    /// Where concern results are persisted; omitted means memory only
    #[arg(long, global = true, env = "AGILEKB_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

impl FileArgs {
    fn paths(&self) -> KbPaths {
        let base = KbPaths::in_dir(&self.data_dir);
        let pick = |flag: &Option<PathBuf>, default: PathBuf| flag.clone().unwrap_or(default);
        KbPaths {
            schema: pick(&self.schema, base.schema),
            ontology: pick(&self.ontology, base.ontology),
            rules: pick(&self.rules, base.rules),
            concerns: pick(&self.concerns, base.concerns),
            goals: pick(&self.goals_catalog, base.goals),
            factors: pick(&self.factors_catalog, base.factors),
            cache_dir: self.cache_dir.clone(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check every input file
    Validate,
    /// Run a SELECT query or a registered concern
    Query {
        /// Query text
        #[arg(conflicts_with_all = ["file", "concern"], required_unless_present_any = ["file", "concern"])]
        query: Option<String>,
        /// Read the query from a file
        #[arg(long, conflicts_with = "concern")]
        file: Option<PathBuf>,
        /// Answer a registered concern instead
        #[arg(long)]
        concern: Option<String>,
        /// Practice parameter of the concern (IRI or prefixed name)
        #[arg(long, requires = "concern")]
        practice: Option<String>,
        #[arg(long, value_enum, default_value = "text", env = "AGILEKB_FORMAT")]
        format: Format,
    },
    /// Recommend practices for a team profile
    Recommend {
        /// Desired goal or principle (repeatable)
        #[arg(long = "goal")]
        goals: Vec<String>,
        /// Situational factor value as factor-id=value (repeatable)
        #[arg(long = "situation", value_parser = parse_situation)]
        situations: Vec<(String, String)>,
        #[arg(long, value_enum, default_value = "text", env = "AGILEKB_FORMAT")]
        format: Format,
    },
    /// Serve the HTTP API
    Serve {
        #[arg(long, env = "AGILEKB_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory of static web assets served at /
        #[arg(long, env = "AGILEKB_STATIC_DIR")]
        static_dir: Option<PathBuf>,
        /// Recommendations computed concurrently
        #[arg(long, env = "AGILEKB_WORKERS", default_value_t = ServerConfig::default().workers)]
        workers: usize,
    },
}

fn parse_situation(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_owned(), v.to_owned())),
        _ => Err(format!("expected factor-id=value, got {s:?}")),
    }
}

fn exit_code(e: &KbError) -> ExitCode {
    match e {
        KbError::Io { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn report_error(e: &KbError) -> ExitCode {
    match e {
        KbError::SchemaViolations(vs) => {
            for v in vs {
                eprintln!("schema violation: {v}");
            }
        }
        KbError::InvalidProfile(issues) => {
            for i in issues {
                eprintln!("invalid_profile: {i}");
            }
        }
        other => eprintln!("error: {other}"),
    }
    exit_code(e)
}

fn load(files: &FileArgs) -> Result<KnowledgeBase, ExitCode> {
    KnowledgeBase::load(&files.paths()).map_err(|e| report_error(&e))
}

fn validate(files: &FileArgs) -> ExitCode {
    let kb = match load(files) {
        Ok(kb) => kb,
        Err(code) => return code,
    };
    println!(
        "ok: {} statements ({} asserted, {} derived), {} concerns, {} goals, {} factors",
        kb.store().len(),
        kb.asserted().len(),
        kb.saturation().derived().len(),
        kb.list_concerns().len(),
        kb.catalog().goals.len(),
        kb.catalog().factors.len()
    );
    ExitCode::SUCCESS
}

fn query(
    files: &FileArgs,
    text: Option<String>,
    file: Option<PathBuf>,
    concern: Option<String>,
    practice: Option<String>,
    format: Format,
) -> ExitCode {
    let text = match (text, file) {
        (Some(t), _) => Some(t),
        (None, Some(path)) => match std::fs::read_to_string(&path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        (None, None) => None,
    };
    let kb = match load(files) {
        Ok(kb) => kb,
        Err(code) => return code,
    };
    let table = match (text, concern) {
        (Some(text), _) => kb.query(&text).map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }),
        (None, Some(id)) => kb.answer_concern(&id, practice.as_deref()).map_err(|e| report_error(&e)),
        (None, None) => unreachable!("clap requires a query source"),
    };
    let table = match table {
        Ok(t) => t,
        Err(code) => return code,
    };
    let out = match format {
        Format::Text => render::table_text(&kb, &table),
        Format::Csv => render::table_csv(&table),
        Format::Json => render::table_json(&table),
    };
    print!("{out}");
    ExitCode::SUCCESS
}

fn recommend(files: &FileArgs, goals: Vec<String>, situations: Vec<(String, String)>, format: Format) -> ExitCode {
    let mut profile = TeamProfile {
        goals,
        ..TeamProfile::default()
    };
    for (factor, value) in situations {
        if let Some(previous) = profile.situations.insert(factor.clone(), value) {
            eprintln!("error: factor {factor:?} given twice (first value {previous:?})");
            return ExitCode::from(2);
        }
    }
    let kb = match load(files) {
        Ok(kb) => kb,
        Err(code) => return code,
    };
    let team = Term::iri(format!("{ONTO}{CLI_TEAM}")).expect("valid IRI");
    let report = match kb.recommend_as(&profile, team) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize")),
        Format::Text | Format::Csv => print!("{}", render::report_text(&kb, &report)),
    }
    ExitCode::SUCCESS
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = interrupt => {}
        _ = terminate => {}
    }
    tracing::info!("shutting down");
}

fn serve(files: &FileArgs, listen: SocketAddr, static_dir: Option<PathBuf>, workers: usize) -> ExitCode {
    let kb = match KnowledgeBase::load(&files.paths()) {
        Ok(kb) => kb,
        Err(e) => {
            tracing::error!("cannot load knowledge base: {e}");
            return exit_code(&e);
        }
    };
    match kb.warm_cache() {
        Ok(n) => tracing::info!(evaluated = n, cached = kb.cached_entries(), "cache warm"),
        Err(e) => {
            tracing::error!("cannot warm cache: {e}");
            return exit_code(&e);
        }
    }
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            tracing::error!("cannot start runtime: {e}");
            return ExitCode::from(1);
        }
    };
    let config = ServerConfig { workers, static_dir };
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(listen).await {
            Ok(l) => l,
            Err(e) => {
                tracing::error!("cannot listen on {listen}: {e}");
                return ExitCode::from(1);
            }
        };
        let addr = listener.local_addr().map(|a| a.to_string()).unwrap_or_else(|_| listen.to_string());
        let app = agilekb_server::router(Arc::new(kb), &config);
        tracing::info!("ready: listening on http://{addr}");
        match agilekb_server::serve(listener, app, shutdown_signal()).await {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                tracing::error!("server failed: {e}");
                ExitCode::from(1)
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) { "info" } else { "warn" };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| default_level.into()),
        )
        .with_writer(std::io::stderr)
        .with_ansi(false)
        .init();
    match cli.command {
        Command::Validate => validate(&cli.files),
        Command::Query {
            query: text,
            file,
            concern,
            practice,
            format,
        } => query(&cli.files, text, file, concern, practice, format),
        Command::Recommend {
            goals,
            situations,
            format,
        } => recommend(&cli.files, goals, situations, format),
        Command::Serve {
            listen,
            static_dir,
            workers,
        } => serve(&cli.files, listen, static_dir, workers),
    }
}
