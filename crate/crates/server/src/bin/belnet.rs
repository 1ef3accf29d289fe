//! `belnet`: runs the portal API, or moves content bundles in and out of a
//! data directory while the service is stopped.

use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use belnet_core::{Actor, PasswordParams, Portal, PortalConfig, DEFAULT_MAX_ATTACHMENT_BYTES};
use belnet_server::{redirect_router, router, AppState, ServerConfig};
use belnet_store::Store;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "belnet", version, about = "Knowledge portal service", args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    serve: ServeArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Write every resource, revision, attachment, taxonomy node and
    /// glossary entry to a bundle directory.
    ExportBundle {
        #[arg(long, env = "BELNET_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        /// Target directory; must be absent or empty.
        out: PathBuf,
    },
    /// Load a bundle directory into the store in one transaction.
    ImportBundle {
        #[arg(long, env = "BELNET_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        bundle: PathBuf,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "BELNET_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "BELNET_BIND", default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, env = "BELNET_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    /// PEM certificate chain; serving switches to HTTPS when given.
    #[arg(long, env = "BELNET_TLS_CERT", requires = "tls_key")]
    tls_cert: Option<PathBuf>,
    #[arg(long, env = "BELNET_TLS_KEY", requires = "tls_cert")]
    tls_key: Option<PathBuf>,
    /// Plain-HTTP port that redirects every request to the HTTPS port.
    #[arg(long, env = "BELNET_HTTP_REDIRECT_PORT", requires = "tls_cert")]
    http_redirect_port: Option<u16>,
    #[arg(long, env = "BELNET_MAX_UPLOAD_BYTES", default_value_t = DEFAULT_MAX_ATTACHMENT_BYTES)]
    max_upload_bytes: u64,
    /// TOML file with `username` and `password` of the first administrator.
    /// Used only while the store has no accounts.
    #[arg(long, env = "BELNET_BOOTSTRAP_ADMIN_FILE")]
    bootstrap_admin_file: Option<PathBuf>,
    #[arg(long, env = "BELNET_SESSION_HOURS", default_value_t = 12)]
    session_hours: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BootstrapAdmin {
    username: String,
    password: String,
}

fn open_portal(data_dir: &Path, config: PortalConfig) -> anyhow::Result<Portal> {
    let store = Store::open(data_dir).with_context(|| format!("opening store at {}", data_dir.display()))?;
    Ok(Portal::new(Arc::new(store), config))
}

fn bootstrap(portal: &Portal, file: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let admin: BootstrapAdmin = toml::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    match portal.bootstrap_admin(&admin.username, &admin.password)? {
        Some(p) => tracing::info!(username = %p.username, "created initial administrator"),
        None => tracing::info!("accounts exist; bootstrap file ignored"),
    }
    Ok(())
}

async fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let portal_config = PortalConfig {
        max_attachment_bytes: args.max_upload_bytes,
        session_lifetime: chrono::Duration::hours(i64::from(args.session_hours)),
        password: PasswordParams::default(),
    };
    let portal = open_portal(&args.data_dir, portal_config)?;
    if let Some(f) = &args.bootstrap_admin_file {
        bootstrap(&portal, f)?;
    }
    let tls = args.tls_cert.is_some();
    let config = ServerConfig {
        max_upload_bytes: args.max_upload_bytes,
        tls_port: tls.then_some(args.port),
        ..ServerConfig::default()
    };
    let app = router(AppState::new(Arc::new(portal), config));
    let addr = SocketAddr::new(args.bind, args.port);

    if let Some(port) = args.http_redirect_port {
        let listener = tokio::net::TcpListener::bind(SocketAddr::new(args.bind, port)).await?;
        tracing::info!(%port, "redirecting plain HTTP to HTTPS");
        tokio::spawn(async move {
            if let Err(e) = axum::serve(listener, redirect_router(args.port)).await {
                tracing::error!(error = %e, "redirect listener stopped");
            }
        });
    }

    match (args.tls_cert, args.tls_key) {
        (Some(cert), Some(key)) => {
            let rustls = axum_server::tls_rustls::RustlsConfig::from_pem_file(&cert, &key)
                .await
                .context("loading TLS certificate and key")?;
            tracing::info!(%addr, "serving HTTPS");
            axum_server::bind_rustls(addr, rustls).serve(app.into_make_service()).await?;
        }
        (None, None) => {
            let listener = tokio::net::TcpListener::bind(addr).await?;
            tracing::info!(%addr, "serving HTTP");
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
        }
        _ => bail!("--tls-cert and --tls-key go together"),
    }
    Ok(())
}

#[tokio::main]
async fn main() {
    if let Err(e) = run().await {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

async fn run() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_env("BELNET_LOG").unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .init();

    let cli = Cli::parse();
    match cli.command {
        None => serve(cli.serve).await,
        Some(Command::ExportBundle { data_dir, out }) => {
            let portal = open_portal(&data_dir, PortalConfig::default())?;
            let s = portal.export_bundle(&out, &Actor::system())?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(())
        }
        Some(Command::ImportBundle { data_dir, bundle }) => {
            let portal = open_portal(&data_dir, PortalConfig::default())?;
            let s = portal.import_bundle(&bundle, &Actor::system())?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(())
        }
    }
}
