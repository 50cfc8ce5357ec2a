//! One service node: RPC listener, instance manager and transport.

use std::fs::OpenOptions;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use tcs_core::{
    EventSink, InstanceManager, KeyStore, ManagerConfig, NullSink, ProtocolMessage, SystemClock,
};
use tcs_core::orchestration::JsonLinesSink;
use tcs_network::{Mode, NetConfig, SocketTransport, Transport};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio::task::JoinHandle;

use crate::api::Handler;
use crate::error::ServiceError;
use crate::keyfiles;
use crate::rpc::{read_frame, write_frame, ErrorCode, RpcError, RpcRequest, RpcResponse};

pub const ENV_RPC_LISTEN: &str = "TCS_RPC_LISTEN";

#[derive(Clone, Debug, Default)]
pub struct NodeOptions {
    /// Overrides `rpc_listen` of the network config.
    pub rpc_listen: Option<String>,
    /// Append instance events as JSON lines to this file.
    pub event_log: Option<PathBuf>,
    /// How long terminated instances stay pollable; defaults to 60 s.
    pub retention: Option<Duration>,
    /// Allow a non-loopback RPC address.
    pub public_rpc: bool,
}

/// Inbound side of a transport.
pub enum Inbox {
    Bounded(mpsc::Receiver<ProtocolMessage>),
    Unbounded(mpsc::UnboundedReceiver<ProtocolMessage>),
}

impl Inbox {
    fn blocking_recv(&mut self) -> Option<ProtocolMessage> {
        match self {
            Inbox::Bounded(rx) => rx.blocking_recv(),
            Inbox::Unbounded(rx) => rx.blocking_recv(),
        }
    }
}

pub struct Node {
    handler: Arc<Handler>,
    rpc_addr: SocketAddr,
    tasks: Vec<JoinHandle<()>>,
    _transport: Arc<dyn Transport>,
}

impl Node {
    pub fn rpc_addr(&self) -> SocketAddr {
        self.rpc_addr
    }

    pub fn handler(&self) -> &Arc<Handler> {
        &self.handler
    }

    pub fn manager(&self) -> &Arc<InstanceManager> {
        self.handler.manager()
    }

    /// Stops accepting RPC connections.
    pub fn shutdown(&mut self) {
        for t in self.tasks.drain(..) {
            t.abort();
        }
    }

    /// Runs until the RPC listener stops.
    pub async fn wait(mut self) {
        for t in self.tasks.drain(..) {
            let _ = t.await;
        }
    }
}

impl Drop for Node {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Resolves the RPC address: the environment wins over options, options
/// over the config file.
pub fn rpc_address(config: &NetConfig, options: &NodeOptions) -> Result<SocketAddr, ServiceError> {
    let raw = std::env::var(ENV_RPC_LISTEN)
        .ok()
        .or_else(|| options.rpc_listen.clone())
        .unwrap_or_else(|| config.rpc_listen.clone());
    let addr: SocketAddr = raw
        .parse()
        .map_err(|e| ServiceError::Config(format!("rpc address {raw:?}: {e}")))?;
    if !addr.ip().is_loopback() && !options.public_rpc {
        return Err(ServiceError::Config(format!(
            "rpc address {addr} is not a loopback address; only co-located clients may issue requests"
        )));
    }
    Ok(addr)
}

/// Starts a node from a network config and a key directory.
pub async fn serve(config: &NetConfig, keys_dir: &Path, options: NodeOptions) -> Result<Node, ServiceError> {
    config.validate()?;
    rpc_address(config, &options)?;
    let keys = keyfiles::load_keystore(keys_dir, config.self_index)?;
    for (key_id, _) in keys.key_ids() {
        let n = keys.get(key_id)?.public.params.n;
        if n != config.n() {
            return Err(ServiceError::Config(format!(
                "key {key_id} is dealt for {n} parties, the network has {}",
                config.n()
            )));
        }
    }
    let auth = if config.auth_enabled {
        Some(keyfiles::load_auth(keys_dir, config.self_index)?)
    } else {
        None
    };
    match config.mode {
        Mode::Sockets => {
            let (transport, inbox) = SocketTransport::start(config, auth).await?;
            serve_with(config, keys, transport, Inbox::Bounded(inbox), options).await
        }
        Mode::Simulated | Mode::Proxy => Err(ServiceError::Config(format!(
            "the node process runs the socket transport; {:?} mode needs an embedding host",
            config.mode
        ))),
    }
}

/// Starts a node on an already running transport.
pub async fn serve_with(
    config: &NetConfig,
    keys: KeyStore,
    transport: Arc<dyn Transport>,
    mut inbox: Inbox,
    options: NodeOptions,
) -> Result<Node, ServiceError> {
    let rpc = rpc_address(config, &options)?;
    let events: Arc<dyn EventSink> = match &options.event_log {
        Some(path) => {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| ServiceError::io(path, e))?;
            Arc::new(JsonLinesSink::new(file))
        }
        None => Arc::new(NullSink),
    };
    let mut mc = ManagerConfig {
        tob_enabled: config.tob_enabled,
        ..ManagerConfig::default()
    };
    if let Some(r) = options.retention {
        mc.retention = r;
    }
    let manager = Arc::new(InstanceManager::new(
        config.self_index,
        keys,
        mc,
        Arc::new(SystemClock::new()),
        events,
    )?);
    let handler = Arc::new(Handler::new(manager, transport.clone()));

    let dispatcher = handler.clone();
    std::thread::Builder::new()
        .name(format!("tcs-dispatch-{}", config.self_index))
        .spawn(move || {
            while let Some(m) = inbox.blocking_recv() {
                let step = dispatcher.manager().dispatch_incoming(&m);
                dispatcher.emit(step);
            }
        })
        .map_err(|e| ServiceError::Config(format!("dispatch thread: {e}")))?;

    let listener = TcpListener::bind(rpc)
        .await
        .map_err(|e| ServiceError::Transport(format!("bind {rpc}: {e}")))?;
    let rpc_addr = listener
        .local_addr()
        .map_err(|e| ServiceError::Transport(e.to_string()))?;
    tracing::info!(node = config.self_index, %rpc_addr, "rpc listening");
    let accept_handler = handler.clone();
    let acceptor = tokio::spawn(async move {
        while let Ok((stream, _)) = listener.accept().await {
            tokio::spawn(connection(accept_handler.clone(), stream));
        }
    });
    Ok(Node {
        handler,
        rpc_addr,
        tasks: vec![acceptor],
        _transport: transport,
    })
}

async fn connection(handler: Arc<Handler>, stream: TcpStream) {
    let _ = stream.set_nodelay(true);
    let (mut rd, mut wr) = stream.into_split();
    let (tx, mut rx) = mpsc::unbounded_channel::<Vec<u8>>();
    let writer = tokio::spawn(async move {
        while let Some(frame) = rx.recv().await {
            if write_frame(&mut wr, &frame).await.is_err() {
                return;
            }
        }
    });
    while let Ok(Some(frame)) = read_frame(&mut rd).await {
        let req: RpcRequest = match serde_json::from_slice(&frame) {
            Ok(r) => r,
            Err(e) => {
                let resp = RpcResponse::from_outcome(0, Err(RpcError::new(ErrorCode::Malformed, e.to_string())));
                let _ = tx.send(serde_json::to_vec(&resp).expect("response encodes"));
                continue;
            }
        };
        let handler = handler.clone();
        let tx = tx.clone();
        tokio::spawn(async move {
            let id = req.id;
            let outcome = tokio::task::spawn_blocking(move || handler.handle(&req.method, req.params))
                .await
                .unwrap_or_else(|e| Err(RpcError::new(ErrorCode::Internal, e.to_string())));
            let resp = RpcResponse::from_outcome(id, outcome);
            let _ = tx.send(serde_json::to_vec(&resp).expect("response encodes"));
        });
    }
    drop(tx);
    let _ = writer.await;
}
