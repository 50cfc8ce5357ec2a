use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("unknown peer {0}")]
    UnknownPeer(u16),
    #[error("total-order broadcast is disabled")]
    TobDisabled,
    #[error("network configuration: {0}")]
    Config(String),
    #[error("malformed envelope: {0}")]
    Envelope(String),
    #[error("authentication tag from party {0} does not verify")]
    Auth(u16),
    #[error("transport: {0}")]
    Io(String),
    #[error("send queue to party {0} is full")]
    QueueFull(u16),
}
