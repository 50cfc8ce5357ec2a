//! Requests, ciphertexts, partial results and final outputs.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dleq::DleqProof;
use crate::encoding::{biguint_b64, bytes_b64, impl_base64_serde};
use crate::error::{Result, SchemeError};
use crate::groups::{EdPoint, EdScalar, FieldScalar, PrimeGroup, G1, G2};
use crate::keys::PublicKeyMaterial;
use crate::params::{SchemeId, SchemeKind};
use crate::sh00::RsaShareProof;

/// Hybrid ciphertext: a threshold key encapsulation plus an authenticated
/// symmetric payload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ciphertext {
    pub scheme: SchemeId,
    #[serde(with = "bytes_b64")]
    pub label: Vec<u8>,
    pub encapsulation: Encapsulation,
    #[serde(with = "bytes_b64")]
    pub payload: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encapsulation {
    /// `u = r·G`, `ū = r·Ḡ` and the validity proof `(e, f)`.
    Sg02 {
        u: EdPoint,
        u_bar: EdPoint,
        e: EdScalar,
        f: EdScalar,
    },
    /// `U = r·P₂` and the pairing-checkable tag `V = r·H(U, L)`.
    Bz03 { u: G2, v: G1 },
}

impl Encapsulation {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Encapsulation::Sg02 { u, u_bar, e, f } => {
                [u.to_bytes(), u_bar.to_bytes(), e.to_bytes(), f.to_bytes()].concat()
            }
            Encapsulation::Bz03 { u, v } => [u.to_bytes(), v.to_bytes()].concat(),
        }
    }
}

impl Ciphertext {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("ciphertext serialization is infallible")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| SchemeError::Malformed(e.to_string()))
    }
}

/// A request a threshold protocol instance operates on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Request {
    Decrypt(Ciphertext),
    Sign(#[serde(with = "bytes_b64")] Vec<u8>),
    Coin(#[serde(with = "bytes_b64")] Vec<u8>),
}

impl Request {
    pub fn kind(&self) -> SchemeKind {
        match self {
            Request::Decrypt(_) => SchemeKind::Cipher,
            Request::Sign(_) => SchemeKind::Signature,
            Request::Coin(_) => SchemeKind::Randomness,
        }
    }

    /// Canonical byte form of the request payload, used for content
    /// addressing.
    pub fn payload_bytes(&self) -> Vec<u8> {
        match self {
            Request::Decrypt(c) => c.to_json(),
            Request::Sign(m) => m.clone(),
            Request::Coin(n) => n.clone(),
        }
    }

    pub fn label(&self) -> &[u8] {
        match self {
            Request::Decrypt(c) => &c.label,
            _ => &[],
        }
    }
}

/// Collision-resistant digest of (scheme, public key, request, label) that
/// every partial result and proof is bound to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RequestBinding(pub [u8; 32]);

impl RequestBinding {
    pub fn compute(pk: &PublicKeyMaterial, request: &Request) -> Result<Self> {
        if pk.scheme.kind() != request.kind() {
            return Err(SchemeError::Unsupported {
                scheme: pk.scheme,
                op: "request of another scheme kind",
            });
        }
        let mut h = Sha256::new();
        let mut part = |b: &[u8]| {
            h.update((b.len() as u64).to_be_bytes());
            h.update(b);
        };
        part(b"tcs/request-binding");
        part(pk.scheme.as_str().as_bytes());
        part(&pk.fingerprint());
        match request {
            // The payload is authenticated by the DEM, so only the key
            // encapsulation and label determine the partial decryptions.
            Request::Decrypt(c) => {
                part(b"decrypt");
                part(&c.encapsulation.to_bytes());
                part(&c.label);
            }
            Request::Sign(m) => {
                part(b"sign");
                part(m);
            }
            Request::Coin(name) => {
                part(b"coin");
                part(name);
            }
        }
        Ok(RequestBinding(h.finalize().into()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.to_vec()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        bytes
            .try_into()
            .map(RequestBinding)
            .map_err(|_| SchemeError::Malformed("request binding must be 32 bytes".into()))
    }
}

impl fmt::Debug for RequestBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RequestBinding(")?;
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

impl_base64_serde!(RequestBinding);

/// One party's contribution: a decryption, signature or coin share.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialResult {
    pub scheme: SchemeId,
    pub binding: RequestBinding,
    pub index: u16,
    pub value: ShareValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareValue {
    Sg02 {
        u_i: EdPoint,
        proof: DleqProof<EdScalar>,
    },
    Bz03 {
        u_i: G2,
    },
    Sh00 {
        #[serde(with = "biguint_b64")]
        x_i: BigUint,
        proof: RsaShareProof,
    },
    Kg20 {
        z_i: EdScalar,
    },
    Bls04 {
        sigma_i: G1,
    },
    Cks05 {
        g_i: EdPoint,
        proof: DleqProof<EdScalar>,
    },
}

impl ShareValue {
    pub fn scheme(&self) -> SchemeId {
        match self {
            ShareValue::Sg02 { .. } => SchemeId::Sg02,
            ShareValue::Bz03 { .. } => SchemeId::Bz03,
            ShareValue::Sh00 { .. } => SchemeId::Sh00,
            ShareValue::Kg20 { .. } => SchemeId::Kg20,
            ShareValue::Bls04 { .. } => SchemeId::Bls04,
            ShareValue::Cks05 { .. } => SchemeId::Cks05,
        }
    }

    pub fn has_proof(&self) -> bool {
        matches!(
            self,
            ShareValue::Sg02 { .. } | ShareValue::Sh00 { .. } | ShareValue::Cks05 { .. }
        )
    }
}

impl PartialResult {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("share serialization is infallible")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let p: PartialResult =
            serde_json::from_slice(bytes).map_err(|e| SchemeError::Malformed(e.to_string()))?;
        if p.value.scheme() != p.scheme {
            return Err(SchemeError::Malformed("share value of another scheme".into()));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    Sh00(#[serde(with = "biguint_b64")] BigUint),
    Bls04(G1),
    /// Schnorr signature `(R, z)` in Ed25519 layout.
    Kg20 { r: EdPoint, z: EdScalar },
}

impl Signature {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Signature::Sh00(y) => y.to_bytes_be(),
            Signature::Bls04(s) => s.to_bytes(),
            Signature::Kg20 { r, z } => [r.to_bytes(), z.to_bytes()].concat(),
        }
    }
}

/// Coin output. `evidence` holds the verified shares it was assembled from,
/// which lets a third party re-check it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinValue {
    #[serde(with = "bytes_b64")]
    pub value: Vec<u8>,
    pub evidence: Vec<PartialResult>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdOutput {
    Plaintext(#[serde(with = "bytes_b64")] Vec<u8>),
    Signature(Signature),
    Coin(CoinValue),
}

impl ThresholdOutput {
    /// The canonical result bytes returned to clients: the plaintext, the
    /// signature encoding, or the 32-byte coin value.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            ThresholdOutput::Plaintext(p) => p.clone(),
            ThresholdOutput::Signature(s) => s.to_bytes(),
            ThresholdOutput::Coin(c) => c.value.clone(),
        }
    }
}
