//! Transport envelope and optional pairwise authentication.

use std::collections::BTreeMap;
use std::path::Path;

use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::error::NetError;

type HmacSha256 = Hmac<Sha256>;

pub const TAG_LEN: usize = 32;
const HEADER: usize = 1 + 2 + 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    P2p,
    /// Message handed to the sequencer for ordering.
    TobSubmit,
    /// Ordered message relayed by the sequencer.
    TobDeliver,
}

impl EnvelopeKind {
    fn to_byte(self) -> u8 {
        match self {
            EnvelopeKind::P2p => 0,
            EnvelopeKind::TobSubmit => 1,
            EnvelopeKind::TobDeliver => 2,
        }
    }

    fn from_byte(b: u8) -> Result<Self, NetError> {
        Ok(match b {
            0 => EnvelopeKind::P2p,
            1 => EnvelopeKind::TobSubmit,
            2 => EnvelopeKind::TobDeliver,
            other => return Err(NetError::Envelope(format!("unknown kind {other}"))),
        })
    }
}

/// Wire bytes of a protocol message plus the hop sender and an optional
/// MAC. Layout: kind u8, from u16 BE, flags u8, wire, tag (if flagged).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub from: u16,
    pub wire: Vec<u8>,
    pub tag: Option<[u8; TAG_LEN]>,
}

impl Envelope {
    pub fn new(kind: EnvelopeKind, from: u16, wire: Vec<u8>) -> Self {
        Envelope { kind, from, wire, tag: None }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER + self.wire.len() + TAG_LEN);
        out.push(self.kind.to_byte());
        out.extend_from_slice(&self.from.to_be_bytes());
        out.push(self.tag.is_some() as u8);
        out.extend_from_slice(&self.wire);
        if let Some(t) = &self.tag {
            out.extend_from_slice(t);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, NetError> {
        if bytes.len() < HEADER {
            return Err(NetError::Envelope("truncated header".into()));
        }
        let kind = EnvelopeKind::from_byte(bytes[0])?;
        let from = u16::from_be_bytes([bytes[1], bytes[2]]);
        let (wire, tag) = match bytes[3] {
            0 => (&bytes[HEADER..], None),
            1 => {
                if bytes.len() < HEADER + TAG_LEN {
                    return Err(NetError::Envelope("truncated tag".into()));
                }
                let split = bytes.len() - TAG_LEN;
                let mut t = [0u8; TAG_LEN];
                t.copy_from_slice(&bytes[split..]);
                (&bytes[HEADER..split], Some(t))
            }
            other => return Err(NetError::Envelope(format!("unknown flags {other}"))),
        };
        Ok(Envelope {
            kind,
            from,
            wire: wire.to_vec(),
            tag,
        })
    }

    fn mac(&self, key: &[u8; 32], to: u16) -> HmacSha256 {
        let mut mac = HmacSha256::new_from_slice(key).expect("any key length works");
        mac.update(b"tcs/envelope");
        mac.update(&[self.kind.to_byte()]);
        mac.update(&self.from.to_be_bytes());
        mac.update(&to.to_be_bytes());
        mac.update(&self.wire);
        mac
    }

    /// Attaches the tag for the hop `self.from → to`.
    pub fn seal(&mut self, keys: &AuthKeys, to: u16) -> Result<(), NetError> {
        let key = keys.key_for(to)?;
        self.tag = Some(self.mac(&key, to).finalize().into_bytes().into());
        Ok(())
    }

    /// Checks the tag of an envelope received by `keys.index`.
    pub fn verify(&self, keys: &AuthKeys) -> Result<(), NetError> {
        let key = keys.key_for(self.from)?;
        let tag = self.tag.ok_or(NetError::Auth(self.from))?;
        self.mac(&key, keys.index)
            .verify_slice(&tag)
            .map_err(|_| NetError::Auth(self.from))
    }
}

/// One party's pairwise MAC keys, hex-encoded in its key file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthKeys {
    pub index: u16,
    pub keys: BTreeMap<u16, String>,
}

impl AuthKeys {
    pub fn key_for(&self, peer: u16) -> Result<[u8; 32], NetError> {
        let hex_key = self.keys.get(&peer).ok_or(NetError::UnknownPeer(peer))?;
        let bytes = hex::decode(hex_key).map_err(|e| NetError::Config(e.to_string()))?;
        bytes
            .try_into()
            .map_err(|_| NetError::Config("MAC keys are 32 bytes".into()))
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        let s = std::fs::read_to_string(path).map_err(|e| NetError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&s).map_err(|e| NetError::Config(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("key serialization is infallible")
    }
}

/// Symmetric keys for every pair of the `n` parties; party `i` gets the
/// keys it shares with each `j` (including itself for loopback).
pub fn deal_auth_keys<R: RngCore + CryptoRng>(n: u16, rng: &mut R) -> Vec<AuthKeys> {
    let mut pair = BTreeMap::new();
    for i in 1..=n {
        for j in i..=n {
            let mut k = [0u8; 32];
            rng.fill_bytes(&mut k);
            pair.insert((i, j), hex::encode(k));
        }
    }
    (1..=n)
        .map(|i| AuthKeys {
            index: i,
            keys: (1..=n).map(|j| (j, pair[&(i.min(j), i.max(j))].clone())).collect(),
        })
        .collect()
}
