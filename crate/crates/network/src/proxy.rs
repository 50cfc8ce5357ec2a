//! Delegation to a host platform's networking. A backend receives encoded
//! envelopes and is responsible for moving and ordering them; the loopback
//! hub is an in-process reference backend.

use std::collections::BTreeMap;
use std::sync::Arc;

use parking_lot::Mutex;
use tcs_core::ProtocolMessage;
use tokio::sync::mpsc;

use crate::envelope::{Envelope, EnvelopeKind};
use crate::error::NetError;
use crate::Transport;

pub trait ProxyBackend: Send + Sync {
    /// Hands an envelope to the host for delivery to party `to`.
    fn p2p_submit(&self, to: u16, envelope: Vec<u8>) -> Result<(), NetError>;

    /// Hands an envelope to the host's total-order broadcast.
    fn tob_submit(&self, envelope: Vec<u8>) -> Result<(), NetError>;
}

/// Transport that forwards everything to a [`ProxyBackend`].
pub struct ProxyTransport {
    index: u16,
    n: u16,
    backend: Arc<dyn ProxyBackend>,
}

impl ProxyTransport {
    pub fn new(index: u16, n: u16, backend: Arc<dyn ProxyBackend>) -> Self {
        ProxyTransport { index, n, backend }
    }
}

impl Transport for ProxyTransport {
    fn self_index(&self) -> u16 {
        self.index
    }

    fn p2p_send(&self, to: u16, m: &ProtocolMessage) -> Result<(), NetError> {
        if to == 0 || to > self.n {
            return Err(NetError::UnknownPeer(to));
        }
        let e = Envelope::new(EnvelopeKind::P2p, self.index, m.to_wire());
        self.backend.p2p_submit(to, e.encode())
    }

    fn p2p_broadcast(&self, m: &ProtocolMessage) -> Result<(), NetError> {
        for to in (1..=self.n).filter(|j| *j != self.index) {
            self.p2p_send(to, m)?;
        }
        Ok(())
    }

    fn tob_broadcast(&self, m: &ProtocolMessage) -> Result<(), NetError> {
        let e = Envelope::new(EnvelopeKind::TobSubmit, self.index, m.to_wire());
        self.backend.tob_submit(e.encode())
    }
}

/// In-process host: every endpoint registered on the hub can reach every
/// other, and TOB submissions are delivered to all in submission order.
#[derive(Default)]
pub struct LoopbackHub {
    endpoints: Mutex<BTreeMap<u16, mpsc::UnboundedSender<ProtocolMessage>>>,
    order: Mutex<u64>,
}

impl LoopbackHub {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    /// Registers party `index` of `n` and returns its transport and inbox.
    pub fn endpoint(self: &Arc<Self>, index: u16, n: u16) -> (ProxyTransport, mpsc::UnboundedReceiver<ProtocolMessage>) {
        let (tx, rx) = mpsc::unbounded_channel();
        self.endpoints.lock().insert(index, tx);
        (ProxyTransport::new(index, n, self.clone()), rx)
    }

    /// Number of TOB messages ordered so far.
    pub fn ordered(&self) -> u64 {
        *self.order.lock()
    }

    fn open(envelope: &[u8]) -> Result<ProtocolMessage, NetError> {
        let e = Envelope::decode(envelope)?;
        ProtocolMessage::from_wire(&e.wire).map_err(|e| NetError::Envelope(e.to_string()))
    }
}

impl ProxyBackend for LoopbackHub {
    fn p2p_submit(&self, to: u16, envelope: Vec<u8>) -> Result<(), NetError> {
        let m = Self::open(&envelope)?;
        let endpoints = self.endpoints.lock();
        let tx = endpoints.get(&to).ok_or(NetError::UnknownPeer(to))?;
        tx.send(m).map_err(|_| NetError::Io(format!("party {to} is gone")))
    }

    fn tob_submit(&self, envelope: Vec<u8>) -> Result<(), NetError> {
        let m = Self::open(&envelope)?;
        let mut order = self.order.lock();
        *order += 1;
        for tx in self.endpoints.lock().values() {
            let _ = tx.send(m.clone());
        }
        Ok(())
    }
}
