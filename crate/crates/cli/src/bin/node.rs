use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use tcs_network::NetConfig;
use tcs_service::{serve, NodeOptions, ServiceError};

/// Runs one party of a threshold cluster.
#[derive(Parser)]
#[command(name = "node", version)]
struct Args {
    /// Network configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory with this party's key shares.
    #[arg(long)]
    keys: PathBuf,
    /// Append instance events to this file as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
    /// RPC listen address; TCS_RPC_LISTEN takes precedence.
    #[arg(long)]
    rpc_listen: Option<String>,
    /// Seconds a finished instance stays pollable.
    #[arg(long, default_value_t = 60.0)]
    retention_s: f64,
    /// Accept RPC connections on a non-loopback address.
    #[arg(long)]
    public_rpc: bool,
}

async fn run(args: Args) -> Result<(), ServiceError> {
    let config = NetConfig::load(&args.config)?;
    if !(args.retention_s > 0.0 && args.retention_s.is_finite()) {
        return Err(ServiceError::Config("retention must be positive".into()));
    }
    let options = NodeOptions {
        rpc_listen: args.rpc_listen,
        event_log: args.events,
        retention: Some(Duration::from_secs_f64(args.retention_s)),
        public_rpc: args.public_rpc,
    };
    let node = serve(&config, &args.keys, options).await?;
    tracing::info!(party = config.self_index, rpc = %node.rpc_addr(), "node ready");
    println!("rpc {}", node.rpc_addr());
    tokio::select! {
        _ = node.wait() => {}
        _ = tokio::signal::ctrl_c() => tracing::info!("interrupted"),
    }
    Ok(())
}

fn main() -> ExitCode {
    tcs_cli::init_logging();
    let args = Args::parse();
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    tcs_cli::finish(rt.block_on(run(args)))
}
