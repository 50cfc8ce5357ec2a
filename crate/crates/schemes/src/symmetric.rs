//! Data encapsulation for the hybrid ciphers: ChaCha20-Poly1305 keyed by a
//! hash of the encapsulated group element.

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use sha2::{Digest, Sha256};

use crate::error::{Result, SchemeError};

pub const TAG_LEN: usize = 16;

fn derive(tag: &[u8], material: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((tag.len() as u64).to_be_bytes());
    h.update(tag);
    h.update(material);
    h.finalize().into()
}

/// Key and nonce for one encapsulation. Every encapsulated key is used for
/// exactly one payload, so deriving the nonce from the encapsulation is safe.
pub struct DemKey {
    key: [u8; 32],
    nonce: [u8; 12],
}

impl DemKey {
    pub fn derive(scheme_tag: &str, shared_secret: &[u8], encapsulation: &[u8]) -> Self {
        let key = derive(format!("{scheme_tag}/dem-key").as_bytes(), shared_secret);
        let n = derive(format!("{scheme_tag}/dem-nonce").as_bytes(), encapsulation);
        let mut nonce = [0u8; 12];
        nonce.copy_from_slice(&n[..12]);
        DemKey { key, nonce }
    }

    pub fn seal(&self, aad: &[u8], plaintext: &[u8]) -> Vec<u8> {
        ChaCha20Poly1305::new(Key::from_slice(&self.key))
            .encrypt(Nonce::from_slice(&self.nonce), Payload { msg: plaintext, aad })
            .expect("ChaCha20-Poly1305 encryption is infallible for in-memory buffers")
    }

    pub fn open(&self, aad: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>> {
        ChaCha20Poly1305::new(Key::from_slice(&self.key))
            .decrypt(Nonce::from_slice(&self.nonce), Payload { msg: ciphertext, aad })
            .map_err(|_| SchemeError::Integrity)
    }
}
