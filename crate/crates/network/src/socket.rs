//! All-to-all TCP transport. Each frame is a 4-byte big-endian length
//! followed by an encoded [`Envelope`]. Every node keeps one outbound
//! connection per peer, re-dialled on failure; party 1 doubles as the
//! sequencer for total-order broadcast.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use tcs_core::ProtocolMessage;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio::task::JoinHandle;

use crate::config::NetConfig;
use crate::envelope::{AuthKeys, Envelope, EnvelopeKind};
use crate::error::NetError;
use crate::Transport;

pub const SEQUENCER: u16 = 1;
const MAX_FRAME: usize = 16 << 20;
const QUEUE: usize = 8192;
const INBOUND_QUEUE: usize = 65_536;
/// Attempts at writing one frame before it is dropped.
const WRITE_ATTEMPTS: u32 = 3;

#[derive(Default, Debug)]
pub struct SocketStats {
    pub sent: AtomicU64,
    pub received: AtomicU64,
    pub dropped: AtomicU64,
    pub auth_failures: AtomicU64,
    pub reconnects: AtomicU64,
}

struct Inner {
    index: u16,
    n: u16,
    tob_enabled: bool,
    auth: Option<AuthKeys>,
    outbound: BTreeMap<u16, mpsc::Sender<Vec<u8>>>,
    inbound: mpsc::Sender<ProtocolMessage>,
    sequencer: Mutex<()>,
    stats: SocketStats,
}

pub struct SocketTransport {
    inner: Arc<Inner>,
    tasks: Mutex<Vec<JoinHandle<()>>>,
    local_addr: std::net::SocketAddr,
}

impl SocketTransport {
    /// Binds the listener and starts the connection tasks. Must run inside
    /// a tokio runtime.
    pub async fn start(
        config: &NetConfig,
        auth: Option<AuthKeys>,
    ) -> Result<(Arc<SocketTransport>, mpsc::Receiver<ProtocolMessage>), NetError> {
        config.validate()?;
        if config.auth_enabled && auth.is_none() {
            return Err(NetError::Config("authentication enabled but no MAC keys given".into()));
        }
        let auth = if config.auth_enabled { auth } else { None };
        let listener = TcpListener::bind(config.address_of(config.self_index)?)
            .await
            .map_err(|e| NetError::Io(format!("bind {}: {e}", config.address_of(config.self_index).unwrap_or(""))))?;
        let local_addr = listener.local_addr().map_err(|e| NetError::Io(e.to_string()))?;
        let (in_tx, in_rx) = mpsc::channel(INBOUND_QUEUE);

        let mut outbound = BTreeMap::new();
        let mut receivers = Vec::new();
        for p in &config.peers {
            if p.index == config.self_index {
                continue;
            }
            let (tx, rx) = mpsc::channel(QUEUE);
            outbound.insert(p.index, tx);
            receivers.push((p.address.clone(), rx));
        }
        let inner = Arc::new(Inner {
            index: config.self_index,
            n: config.n(),
            tob_enabled: config.tob_enabled,
            auth,
            outbound,
            inbound: in_tx,
            sequencer: Mutex::new(()),
            stats: SocketStats::default(),
        });
        let mut tasks = Vec::new();
        for (addr, rx) in receivers {
            tasks.push(tokio::spawn(writer(inner.clone(), addr, rx)));
        }
        tasks.push(tokio::spawn(acceptor(inner.clone(), listener)));
        Ok((
            Arc::new(SocketTransport {
                inner,
                tasks: Mutex::new(tasks),
                local_addr,
            }),
            in_rx,
        ))
    }

    pub fn local_addr(&self) -> std::net::SocketAddr {
        self.local_addr
    }

    pub fn stats(&self) -> &SocketStats {
        &self.inner.stats
    }

    pub fn shutdown(&self) {
        for t in self.tasks.lock().drain(..) {
            t.abort();
        }
    }
}

impl Drop for SocketTransport {
    fn drop(&mut self) {
        self.shutdown();
    }
}

impl Inner {
    fn enqueue(&self, kind: EnvelopeKind, to: u16, wire: Vec<u8>) -> Result<(), NetError> {
        let tx = self.outbound.get(&to).ok_or(NetError::UnknownPeer(to))?;
        let mut e = Envelope::new(kind, self.index, wire);
        if let Some(keys) = &self.auth {
            e.seal(keys, to)?;
        }
        tx.try_send(e.encode()).map_err(|_| {
            self.stats.dropped.fetch_add(1, Ordering::Relaxed);
            NetError::QueueFull(to)
        })
    }

    fn deliver_local(&self, m: ProtocolMessage) -> Result<(), NetError> {
        self.inbound
            .try_send(m)
            .map_err(|_| NetError::QueueFull(self.index))
    }

    /// Assigns the next position in the total order: the message is queued
    /// to every party, in the same order on every connection.
    fn sequence(&self, wire: Vec<u8>) -> Result<(), NetError> {
        let m = ProtocolMessage::from_wire(&wire).map_err(|e| NetError::Envelope(e.to_string()))?;
        let _order = self.sequencer.lock();
        for to in 1..=self.n {
            if to == self.index {
                self.deliver_local(m.clone())?;
            } else {
                // A full queue loses the message for that party only.
                let _ = self.enqueue(EnvelopeKind::TobDeliver, to, wire.clone());
            }
        }
        Ok(())
    }

    async fn handle(&self, env: Envelope) {
        if let Some(keys) = &self.auth {
            if env.verify(keys).is_err() {
                self.stats.auth_failures.fetch_add(1, Ordering::Relaxed);
                return;
            }
        }
        self.stats.received.fetch_add(1, Ordering::Relaxed);
        match env.kind {
            EnvelopeKind::TobSubmit => {
                if self.index == SEQUENCER && self.tob_enabled {
                    let _ = self.sequence(env.wire);
                }
            }
            EnvelopeKind::P2p | EnvelopeKind::TobDeliver => {
                if let Ok(m) = ProtocolMessage::from_wire(&env.wire) {
                    let _ = self.inbound.send(m).await;
                }
            }
        }
    }
}

impl Transport for SocketTransport {
    fn self_index(&self) -> u16 {
        self.inner.index
    }

    fn p2p_send(&self, to: u16, m: &ProtocolMessage) -> Result<(), NetError> {
        if to == self.inner.index {
            return self.inner.deliver_local(m.clone());
        }
        self.inner.enqueue(EnvelopeKind::P2p, to, m.to_wire())
    }

    fn p2p_broadcast(&self, m: &ProtocolMessage) -> Result<(), NetError> {
        let wire = m.to_wire();
        let mut first_err = None;
        for to in 1..=self.inner.n {
            if to != self.inner.index {
                if let Err(e) = self.inner.enqueue(EnvelopeKind::P2p, to, wire.clone()) {
                    first_err.get_or_insert(e);
                }
            }
        }
        first_err.map_or(Ok(()), Err)
    }

    fn tob_broadcast(&self, m: &ProtocolMessage) -> Result<(), NetError> {
        if !self.inner.tob_enabled {
            return Err(NetError::TobDisabled);
        }
        if self.inner.index == SEQUENCER {
            self.inner.sequence(m.to_wire())
        } else {
            self.inner.enqueue(EnvelopeKind::TobSubmit, SEQUENCER, m.to_wire())
        }
    }
}

async fn connect(inner: &Inner, addr: &str) -> TcpStream {
    let mut backoff = Duration::from_millis(20);
    loop {
        match TcpStream::connect(addr).await {
            Ok(s) => {
                let _ = s.set_nodelay(true);
                return s;
            }
            Err(_) => {
                inner.stats.reconnects.fetch_add(1, Ordering::Relaxed);
                tokio::time::sleep(backoff).await;
                backoff = (backoff * 2).min(Duration::from_secs(1));
            }
        }
    }
}

async fn writer(inner: Arc<Inner>, addr: String, mut rx: mpsc::Receiver<Vec<u8>>) {
    let mut conn: Option<TcpStream> = None;
    while let Some(frame) = rx.recv().await {
        let mut attempts = 0;
        loop {
            let stream = match &mut conn {
                Some(s) => s,
                None => conn.insert(connect(&inner, &addr).await),
            };
            let len = (frame.len() as u32).to_be_bytes();
            let res = async {
                stream.write_all(&len).await?;
                stream.write_all(&frame).await
            }
            .await;
            match res {
                Ok(()) => {
                    inner.stats.sent.fetch_add(1, Ordering::Relaxed);
                    break;
                }
                Err(_) => {
                    conn = None;
                    attempts += 1;
                    if attempts >= WRITE_ATTEMPTS {
                        inner.stats.dropped.fetch_add(1, Ordering::Relaxed);
                        break;
                    }
                }
            }
        }
    }
}

async fn acceptor(inner: Arc<Inner>, listener: TcpListener) {
    while let Ok((stream, _)) = listener.accept().await {
        let _ = stream.set_nodelay(true);
        tokio::spawn(reader(inner.clone(), stream));
    }
}

async fn reader(inner: Arc<Inner>, mut stream: TcpStream) {
    let mut len = [0u8; 4];
    loop {
        if stream.read_exact(&mut len).await.is_err() {
            return;
        }
        let size = u32::from_be_bytes(len) as usize;
        if size > MAX_FRAME {
            return;
        }
        let mut buf = vec![0u8; size];
        if stream.read_exact(&mut buf).await.is_err() {
            return;
        }
        match Envelope::decode(&buf) {
            Ok(env) => inner.handle(env).await,
            Err(_) => {
                inner.stats.dropped.fetch_add(1, Ordering::Relaxed);
            }
        }
    }
}
