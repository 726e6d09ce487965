use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pqa::settings::{self, DATA_DIR_ENV, DEFAULT_PORT, PORT_ENV};
use pqa_core::orchestrator::Engine;

#[derive(Parser)]
#[command(name = "pqa", version, about = "Answer prediction questions over a catalog of datasets and models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Directory holding datasets, models, indexes and sessions.
    #[arg(long, env = DATA_DIR_ENV, global = true)]
    data_dir: Option<PathBuf>,
    /// TOML file with engine settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[command(flatten)]
        common: Common,
    },
    /// Add a CSV file to the catalog.
    Ingest {
        file: PathBuf,
        /// Dataset name; defaults to the file name without extension.
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Chat with the engine on the terminal.
    Chat {
        /// Continue an existing session.
        #[arg(long)]
        session: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Index maintenance.
    Index {
        #[command(subcommand)]
        action: IndexAction,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum IndexAction {
    /// Re-embed every profile, e.g. after changing the embedding settings.
    Rebuild,
}

fn open(common: &Common) -> anyhow::Result<Engine> {
    let config = settings::load(common.config.as_deref(), common.data_dir.clone())?;
    let dir = config.data_dir.clone().unwrap_or_default();
    Engine::open(config).with_context(|| format!("opening data directory {}", dir.display()))
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Serve { port, host, common } => serve(open(&common)?, &host, port),
        Command::Ingest { file, name, common } => {
            let engine = open(&common)?;
            let name = match name {
                Some(n) => n,
                None => file
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .context("cannot derive a dataset name from the file; pass --name")?
                    .to_string(),
            };
            let csv = std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let profile = engine.ingest_dataset(&name, &csv)?;
            println!("ingested {} ({} rows, {} columns)", profile.name, profile.row_count, profile.columns.len());
            Ok(())
        }
        Command::Chat { session, common } => chat(open(&common)?, session),
        Command::Index { action: IndexAction::Rebuild, common } => {
            let engine = open(&common)?;
            engine.rebuild_index()?;
            let cat = engine.catalog();
            println!("rebuilt index: {} datasets, {} models", cat.datasets().count(), cat.models().count());
            Ok(())
        }
    }
}

fn serve(engine: Engine, host: &str, port: u16) -> anyhow::Result<()> {
    let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        // printed on stdout so scripts can pick up the port when 0 was given
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        let app = pqa::api::router(Arc::new(engine));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn chat(engine: Engine, session: Option<String>) -> anyhow::Result<()> {
    let id = match session {
        Some(id) => {
            engine.session(&id).with_context(|| format!("unknown session {id:?}"))?;
            id
        }
        None => engine.create_session()?.id,
    };
    println!("session {id}. Type a question, \"help\" for a guide, or \"quit\" to leave.");
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if matches!(line, "quit" | "exit") {
            break;
        }
        match engine.handle_message(&id, line) {
            Ok(reply) => {
                let kind = serde_json::to_value(reply.kind)?;
                println!("[{}] {}", kind.as_str().unwrap_or_default(), reply.text);
            }
            Err(e) => println!("[error] {e}"),
        }
    }
    Ok(())
}
