//! Instance identifiers and the protocol message envelope.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tcs_schemes::{FrostNonceCommitment, PartialResult, Request, SchemeId};

use crate::error::ProtocolError;

/// Content-derived identifier: every party computes the same id for the
/// same request without coordination.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstanceId(pub [u8; 16]);

impl InstanceId {
    pub fn derive(scheme: SchemeId, key_id: &str, request: &Request) -> Self {
        let mut h = Sha256::new();
        for part in [
            b"tcs/instance".as_slice(),
            scheme.as_str().as_bytes(),
            key_id.as_bytes(),
            &request.payload_bytes(),
            request.label(),
        ] {
            h.update((part.len() as u64).to_be_bytes());
            h.update(part);
        }
        let digest = h.finalize();
        let mut id = [0u8; 16];
        id.copy_from_slice(&digest[..16]);
        InstanceId(id)
    }

    /// Id under which a party publishes precomputed FROST commitments.
    pub fn precompute(key_id: &str, sender: u16, batch: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"tcs/precompute");
        h.update((key_id.len() as u64).to_be_bytes());
        h.update(key_id.as_bytes());
        h.update(sender.to_be_bytes());
        h.update(batch.to_be_bytes());
        let digest = h.finalize();
        let mut id = [0u8; 16];
        id.copy_from_slice(&digest[..16]);
        InstanceId(id)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, ProtocolError> {
        let bytes = hex::decode(s).map_err(|e| ProtocolError::Decode(e.to_string()))?;
        let arr: [u8; 16] = bytes
            .try_into()
            .map_err(|_| ProtocolError::Decode("instance id must be 16 bytes".into()))?;
        Ok(InstanceId(arr))
    }
}

impl fmt::Debug for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InstanceId({})", &self.to_hex()[..12])
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for InstanceId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for InstanceId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        InstanceId::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    P2p,
    Tob,
}

impl Channel {
    fn to_byte(self) -> u8 {
        match self {
            Channel::P2p => 0,
            Channel::Tob => 1,
        }
    }

    fn from_byte(b: u8) -> Result<Self, ProtocolError> {
        match b {
            0 => Ok(Channel::P2p),
            1 => Ok(Channel::Tob),
            other => Err(ProtocolError::Decode(format!("unknown channel {other}"))),
        }
    }
}

/// What a round carries. Encoded as JSON inside the binary envelope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Share(PartialResult),
    Commitment(FrostNonceCommitment),
    /// A batch of FROST commitments published ahead of time, by slot.
    Precommitments {
        key_id: String,
        batch: Vec<(u64, FrostNonceCommitment)>,
    },
}

impl Payload {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("payload serialization is infallible")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        serde_json::from_slice(bytes).map_err(|e| ProtocolError::Decode(e.to_string()))
    }
}

/// Round 0 is reserved for precomputation broadcasts.
pub const PRECOMPUTE_ROUND: u8 = 0;

pub const HEADER_LEN: usize = 16 + 2 + 1 + 1 + 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolMessage {
    pub instance_id: InstanceId,
    pub sender: u16,
    pub round: u8,
    pub channel: Channel,
    pub payload: Vec<u8>,
}

impl ProtocolMessage {
    pub fn new(instance_id: InstanceId, sender: u16, round: u8, channel: Channel, payload: &Payload) -> Self {
        ProtocolMessage {
            instance_id,
            sender,
            round,
            channel,
            payload: payload.encode(),
        }
    }

    /// Header (instance id, sender, round, channel, payload length; all
    /// big-endian) followed by the payload.
    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.instance_id.0);
        out.extend_from_slice(&self.sender.to_be_bytes());
        out.push(self.round);
        out.push(self.channel.to_byte());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() < HEADER_LEN {
            return Err(ProtocolError::Decode(format!("{} bytes is shorter than the header", bytes.len())));
        }
        let mut id = [0u8; 16];
        id.copy_from_slice(&bytes[..16]);
        let sender = u16::from_be_bytes([bytes[16], bytes[17]]);
        let round = bytes[18];
        let channel = Channel::from_byte(bytes[19])?;
        let len = u32::from_be_bytes([bytes[20], bytes[21], bytes[22], bytes[23]]) as usize;
        if bytes.len() != HEADER_LEN + len {
            return Err(ProtocolError::Decode(format!(
                "payload length {len} does not match {} trailing bytes",
                bytes.len() - HEADER_LEN
            )));
        }
        Ok(ProtocolMessage {
            instance_id: InstanceId(id),
            sender,
            round,
            channel,
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }

    pub fn decode_payload(&self) -> Result<Payload, ProtocolError> {
        Payload::decode(&self.payload)
    }
}
