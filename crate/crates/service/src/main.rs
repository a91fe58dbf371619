use std::fs;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use glyphforge_core::{
    audit_schema, category_distribution, cooccurrence, fixtures, frequency, load_catalog, ClassificationSchema, Corpus,
    Sign, VersionMap,
};
use glyphforge_service::{router, AppState, ServiceConfig};
use serde_json::json;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "glyphforge",
    version,
    about = "Sign notation catalog, search and editor service"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Validate a manifest and write a normalized copy.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a classification schema against a catalog.
    Audit {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Rewrite a sign file's codes with a version map.
    Migrate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Apply the map backwards.
        #[arg(long)]
        inverse: bool,
    },
    /// Frequency, co-occurrence and role tables for a directory of signs.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Write a fixture catalog (manifest, schema, placeholder images).
    Fixture {
        #[arg(long)]
        out: PathBuf,
        /// Generate a synthetic catalog of this many glyphs instead of DF-1.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        no_images: bool,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "GLYPHFORGE_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long, env = "GLYPHFORGE_CORPUS_DIR")]
    corpus_dir: PathBuf,
    #[arg(long)]
    log_dir: PathBuf,
    /// Static UI bundle to serve at `/`.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = BufWriter::new(io::stdout().lock());
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

async fn serve(args: ServeArgs) -> Result<()> {
    let config = ServiceConfig {
        manifest: args.manifest,
        schema: args.schema,
        corpus_dir: args.corpus_dir,
        log_dir: args.log_dir,
        ui_dir: args.ui_dir,
    };
    let (state, report) = AppState::open(&config).inspect_err(|e| tracing::error!(error = ?e, "startup failed"))?;
    for warning in &report.warnings {
        tracing::warn!(?warning, "catalog image problem");
    }
    tracing::info!(version = %report.version_tag, glyphs = report.glyphs, "catalog loaded");

    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot listen on {addr}"))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Serve(_) => unreachable!("handled in main"),
        Command::Ingest { manifest, out } => {
            let (catalog, report) = load_catalog(&manifest)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            let mut file =
                BufWriter::new(fs::File::create(&out).with_context(|| format!("cannot create {}", out.display()))?);
            catalog.write_manifest(&mut file)?;
            file.flush()?;
            print_json(&report)
        }
        Command::Audit { schema, manifest } => {
            let schema = ClassificationSchema::load(&schema)?;
            let (catalog, _) = load_catalog(&manifest)?;
            print_json(&audit_schema(&schema, &catalog))
        }
        Command::Migrate {
            map,
            input,
            out,
            inverse,
        } => {
            let mut map = VersionMap::load(&map)?;
            if inverse {
                map = map.inverse();
            }
            let text = fs::read_to_string(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let sign = Sign::parse(&text).with_context(|| format!("{}", input.display()))?;
            let migrated = map.migrate_sign(&sign)?;
            fs::write(&out, migrated.serialize()).with_context(|| format!("cannot write {}", out.display()))?;
            Ok(())
        }
        Command::Stats { corpus, catalog } => {
            let corpus = Corpus::load_dir(&corpus)?;
            let distribution = match catalog {
                Some(path) => Some(category_distribution(&corpus, &load_catalog(&path)?.0)?),
                None => None,
            };
            print_json(&json!({
                "signs": corpus.len(),
                "placements": corpus.total_placements(),
                "frequency": frequency(&corpus),
                "cooccurrence": cooccurrence(&corpus),
                "categories": distribution,
            }))
        }
        Command::Fixture {
            out,
            synthetic,
            seed,
            no_images,
        } => {
            let (catalog, schema) = match synthetic {
                Some(0) => bail!("--synthetic needs at least one glyph"),
                Some(n) => (fixtures::synthetic_catalog(n, seed), None),
                None => (fixtures::df1_catalog(), Some(fixtures::df1_schema())),
            };
            fixtures::write_fixture(&out, &catalog, schema.as_ref(), !no_images)?;
            eprintln!("wrote {} glyphs to {}", catalog.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(io::stderr)
        .with_ansi(io::stderr().is_terminal())
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Serve(args) => tokio::runtime::Runtime::new()?.block_on(serve(args)),
        other => run(other),
    }
}
