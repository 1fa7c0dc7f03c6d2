use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rpm_service::{Role, Service, ServiceConfig, SystemClock};

#[derive(Debug, Parser)]
#[command(name = "rpm-service", about = "Clinic node for remote distress screening")]
struct Cli {
    /// TOML config file. RPM_* environment variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve,
    /// Create an account.
    AddUser {
        #[arg(long)]
        user_id: String,
        #[arg(long)]
        role: Role,
        #[arg(long)]
        password: String,
        /// Subject this account may read; repeatable. Ignored for patients.
        #[arg(long = "link")]
        links: Vec<String>,
    },
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    let cli = Cli::parse();
    let config = ServiceConfig::load_from_process_env(cli.config.as_deref())?;
    let mut service = Service::open(config.clone(), Arc::new(SystemClock))?;
    match cli.command {
        Command::AddUser {
            user_id,
            role,
            password,
            links,
        } => {
            let account = service.register_user(&user_id, role, links, &password)?;
            println!("{}", serde_json::to_string(&account)?);
        }
        Command::Serve => {
            let app = rpm_service::http::router(Arc::new(Mutex::new(service)));
            let addr = ("0.0.0.0", config.port);
            let listener = tokio::net::TcpListener::bind(addr)
                .await
                .with_context(|| format!("binding port {}", config.port))?;
            tracing::info!(port = config.port, data_dir = %config.data_dir.display(), "listening");
            axum::serve(listener, app).await?;
        }
    }
    Ok(())
}
