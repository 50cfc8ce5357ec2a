//! Network layer: a point-to-point interface and a total-order broadcast
//! interface, backed by a discrete-event simulator, TCP sockets or a proxy.

pub mod config;
pub mod envelope;
pub mod error;
pub mod proxy;
pub mod sim;
pub mod socket;

pub use config::{Delay, LatencyModel, Mode, NetConfig, Peer, Preset};
pub use envelope::{deal_auth_keys, AuthKeys, Envelope, EnvelopeKind};
pub use error::NetError;
pub use proxy::{LoopbackHub, ProxyBackend, ProxyTransport};
pub use sim::{Delivery, Dest, NetStats, SimConfig, SimNetwork, TraceEntry};
pub use socket::SocketTransport;

use tcs_core::ProtocolMessage;

/// Outbound half of a live transport. Inbound messages arrive on the
/// channel returned when the transport starts.
pub trait Transport: Send + Sync {
    fn self_index(&self) -> u16;

    /// Sends to one party. Sending to oneself loops back locally.
    fn p2p_send(&self, to: u16, m: &ProtocolMessage) -> Result<(), NetError>;

    /// Sends to every other party.
    fn p2p_broadcast(&self, m: &ProtocolMessage) -> Result<(), NetError>;

    fn tob_broadcast(&self, m: &ProtocolMessage) -> Result<(), NetError>;

    /// Sends on the channel the message declares.
    fn send(&self, m: &ProtocolMessage) -> Result<(), NetError> {
        match m.channel {
            tcs_core::Channel::P2p => self.p2p_broadcast(m),
            tcs_core::Channel::Tob => self.tob_broadcast(m),
        }
    }
}
