//! The Threshold Round Interface and its executors.
//!
//! An instance is driven by one owner: `do_round` produces this party's
//! message for the current round, `update` records a received message and
//! reports whether the instance can advance or finalize, and `finalize`
//! assembles the result once.

mod frost;
mod single_round;

pub use frost::FrostProtocol;
pub use single_round::SingleRoundProtocol;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use tcs_schemes::ThresholdOutput;

use crate::error::ProtocolError;
use crate::message::{InstanceId, ProtocolMessage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Progress {
    None,
    ReadyForNextRound,
    ReadyToFinalize,
}

/// Per-instance message accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MessageStats {
    pub received: u32,
    pub rejected: u32,
    pub duplicates: u32,
    /// Messages that arrived after the instance terminated.
    pub late: u32,
    pub verifications: u32,
}

pub trait ThresholdRoundProtocol: Send {
    fn instance_id(&self) -> InstanceId;

    /// Number of rounds this party has entered so far.
    fn current_round(&self) -> u8;

    /// This party's message for the next round, if it has one to send.
    fn do_round(&mut self) -> Result<Option<ProtocolMessage>, ProtocolError>;

    fn update(&mut self, m: &ProtocolMessage) -> Result<Progress, ProtocolError>;

    fn is_ready_for_next_round(&self) -> bool;

    fn is_ready_to_finalize(&self) -> bool;

    fn finalize(&mut self) -> Result<ThresholdOutput, ProtocolError>;

    fn is_terminated(&self) -> bool;

    fn stats(&self) -> MessageStats;
}

/// Deterministic per-instance randomness for proofs and nonces.
pub fn instance_rng(seed: &[u8; 32], index: u16, id: &InstanceId) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"tcs/instance-rng");
    h.update(seed);
    h.update(index.to_be_bytes());
    h.update(id.0);
    ChaCha20Rng::from_seed(h.finalize().into())
}
