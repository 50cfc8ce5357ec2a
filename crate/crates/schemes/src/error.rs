use thiserror::Error;

use crate::params::SchemeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("invalid threshold parameters: n={n}, t={t}")]
    InvalidParams { n: u16, t: u16 },
    #[error("party index {0} is out of range")]
    IndexOutOfRange(u16),
    #[error("duplicate party index {0}")]
    DuplicateIndex(u16),
    #[error("party index {0} is not part of the interpolation set")]
    NotInSubset(u16),
    #[error("interpolation needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("operation {op} is not supported by {scheme}")]
    Unsupported { scheme: SchemeId, op: &'static str },
    #[error("input belongs to a different scheme")]
    SchemeMismatch,
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("ciphertext failed the validity check")]
    InvalidCiphertext,
    #[error("insufficient shares: need {needed}, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("share from party {0} failed verification")]
    InvalidShare(u16),
    #[error("share is bound to a different request")]
    BindingMismatch,
    #[error("payload authentication failed")]
    Integrity,
    #[error("nonce has already been consumed")]
    NonceReuse,
    #[error("signing set mismatch: {0}")]
    SigningSet(String),
    #[error("combined result failed verification")]
    ResultVerification,
    #[error("RSA key generation failed: {0}")]
    KeyGeneration(String),
}

pub type Result<T, E = SchemeError> = std::result::Result<T, E>;
