//! Threshold cryptographic schemes with a trusted dealer: two CCA-secure
//! ciphers (SG02, BZ03), three signature schemes (SH00, BLS04, KG20) and a
//! coin-tossing scheme (CKS05).
//!
//! The crate is usable on its own. [`api`] exposes scheme-agnostic entry
//! points; the per-scheme modules hold the constructions.

pub mod api;
pub mod bls04;
pub mod bz03;
pub mod cks05;
pub mod dleq;
pub mod encoding;
pub mod error;
pub mod groups;
pub mod keys;
pub mod kg20;
pub mod params;
pub mod request;
pub mod sg02;
pub mod sh00;
pub mod symmetric;

pub use error::{Result, SchemeError};
pub use keys::{DealOptions, KeyShare, PublicKeyMaterial, SecretValue};
pub use kg20::{FrostNonceCommitment, FrostNonces, NonceStore, SigningPackage};
pub use params::{SchemeId, SchemeKind, ThresholdParams};
pub use request::{
    Ciphertext, CoinValue, PartialResult, Request, RequestBinding, ShareValue, Signature, ThresholdOutput,
};
