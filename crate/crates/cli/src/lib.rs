//! Command line driver and HTTP service.
//!
//! Every command except `stats` reads a pipeline configuration (see
//! [`apitask_kg::pipeline`] for the file format). `query` and `serve` only
//! need the snapshot and vector file, so they also run without one.

pub mod render;
pub mod server;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use apitask_kg::graphstore::{GraphError, KnowledgeGraph};
use apitask_kg::pipeline::{open_engine, GraphStats, Pipeline, PipelineConfig, PipelineError, Stage};
use apitask_kg::search::{SearchEngine, SearchError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read snapshot: {0}")]
    Snapshot(#[source] GraphError),
    #[error("cannot serve on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 user/config error, 2 corpus error, 3 internal error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pipeline(e) => e.exit_code(),
            CliError::Search(SearchError::EmptyGraph) => 2,
            CliError::Search(_) | CliError::Usage(_) | CliError::Bind { .. } => 1,
            CliError::Snapshot(GraphError::Io { .. }) => 1,
            CliError::Snapshot(GraphError::CorruptSnapshot { .. } | GraphError::VersionMismatch { .. }) => 2,
            CliError::Snapshot(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "apitask", version, about = "Build and search a fused API/task knowledge graph")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Pipeline configuration file (TOML).
    #[arg(short, long, global = true, default_value = "apitask.toml")]
    pub config: PathBuf,
    /// Override the output directory of the configuration.
    #[arg(long, global = true)]
    pub out_dir: Option<String>,
    /// Override the embedding seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse API reference pages into the API graph.
    BuildApi,
    /// Extract tasks from tutorial pages into the task graph.
    BuildTask,
    /// Train word embeddings on the sentences of both graphs.
    TrainEmbed,
    /// Link task mentions to API entities.
    Fuse,
    /// Add API and task semantic relations and write the snapshot.
    Enrich,
    /// Run every stage in order.
    All,
    /// Search the snapshot with a text or code query.
    Query(QueryArgs),
    /// Print node and edge counts of a snapshot.
    Stats(StatsArgs),
    /// Serve the search HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    /// The result document as JSON.
    Machine,
}

#[derive(Debug, Clone, Args)]
pub struct IndexArgs {
    /// Snapshot to load; defaults to the configured snapshot.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Vector file to load; defaults to the configured build's vectors.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    /// Query text, or code with --code. Read from standard input when
    /// absent or "-".
    pub query: Option<String>,
    /// Treat the query as a code snippet.
    #[arg(long)]
    pub code: bool,
    /// Read the query from a file.
    #[arg(long, conflicts_with = "query")]
    pub file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[command(flatten)]
    pub index: IndexArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Snapshot to inspect; defaults to the configured snapshot.
    pub snapshot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[command(flatten)]
    pub index: IndexArgs,
}

impl GlobalArgs {
    /// The configuration with flag overrides applied.
    pub fn load_config(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::load(&self.config)?;
        if let Some(dir) = &self.out_dir {
            cfg.file.output.dir = dir.clone();
            cfg.file.output.snapshot = None;
        }
        if let Some(seed) = self.seed {
            cfg.file.embedding.seed = seed;
        }
        Ok(cfg)
    }

    fn config_if_present(&self) -> Result<Option<PipelineConfig>, CliError> {
        if self.config.is_file() {
            self.load_config().map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Load a search engine for `query` and `serve`.
pub fn load_engine(global: &GlobalArgs, index: &IndexArgs) -> Result<SearchEngine, CliError> {
    let cfg = global.config_if_present()?;
    let snapshot = match (&index.snapshot, &cfg) {
        (Some(p), _) => p.clone(),
        (None, Some(cfg)) => cfg.snapshot_path(),
        (None, None) => return Err(no_config(&global.config, "--snapshot")),
    };
    let vectors = match (&index.vectors, &cfg) {
        (Some(p), _) => p.clone(),
        (None, Some(cfg)) => cfg.artifact("vectors.txt"),
        (None, None) => return Err(no_config(&global.config, "--vectors")),
    };
    Ok(open_engine(cfg.as_ref(), &snapshot, &vectors)?)
}

fn no_config(config: &Path, flag: &str) -> CliError {
    CliError::Usage(format!("configuration {} not found; pass {flag} explicitly", config.display()))
}

fn read_query(args: &QueryArgs) -> Result<String, CliError> {
    use std::io::Read;
    match (&args.file, args.query.as_deref()) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display()))),
        (None, Some(q)) if q != "-" => Ok(q.to_string()),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

/// Run a command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let stage = match &cli.command {
        Command::BuildApi => Some(Stage::BuildApi),
        Command::BuildTask => Some(Stage::BuildTask),
        Command::TrainEmbed => Some(Stage::TrainEmbed),
        Command::Fuse => Some(Stage::Fuse),
        Command::Enrich => Some(Stage::Enrich),
        _ => None,
    };
    if let Some(stage) = stage {
        let pipeline = Pipeline::new(cli.global.load_config()?)?;
        write!(out, "{}", pipeline.run(stage)?)?;
        return Ok(());
    }
    match &cli.command {
        Command::All => {
            let pipeline = Pipeline::new(cli.global.load_config()?)?;
            for summary in pipeline.run_all()? {
                write!(out, "{summary}")?;
            }
        }
        Command::Query(args) => {
            let engine = load_engine(&cli.global, &args.index)?;
            let body = read_query(args)?;
            let result = if args.code {
                engine.search_code(&body)?
            } else {
                engine.search_text(body.trim())?
            };
            match args.format {
                Format::Human => write!(out, "{}", render::search_result(&result))?,
                Format::Machine => writeln!(out, "{}", serde_json::to_string_pretty(&result).expect("result serializes"))?,
            }
        }
        Command::Stats(args) => {
            let path = match &args.snapshot {
                Some(p) => p.clone(),
                None => cli.global.load_config()?.snapshot_path(),
            };
            let graph = KnowledgeGraph::load(&path).map_err(CliError::Snapshot)?;
            let stats = GraphStats::of(&graph);
            match args.format {
                Format::Human => write!(out, "{stats}")?,
                Format::Machine => writeln!(out, "{}", serde_json::to_string_pretty(&stats).expect("stats serialize"))?,
            }
        }
        Command::Serve(args) => {
            let engine = load_engine(&cli.global, &args.index)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(engine, args.addr, out))?;
        }
        Command::BuildApi | Command::BuildTask | Command::TrainEmbed | Command::Fuse | Command::Enrich => unreachable!("handled above"),
    }
    Ok(())
}
