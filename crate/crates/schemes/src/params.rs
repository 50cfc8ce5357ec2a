use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SchemeError};

/// Access structure of a `(t+1)`-of-`n` scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub n: u16,
    pub t: u16,
}

impl ThresholdParams {
    pub fn new(n: u16, t: u16) -> Result<Self> {
        if n == 0 || t >= n {
            return Err(SchemeError::InvalidParams { n, t });
        }
        Ok(Self { n, t })
    }

    /// The usual BFT sizing, `n = 3t + 1`.
    pub fn bft(t: u16) -> Self {
        Self { n: 3 * t + 1, t }
    }

    /// Number of shares needed to complete an operation.
    pub fn quorum(&self) -> usize {
        self.t as usize + 1
    }

    pub fn check_index(&self, index: u16) -> Result<()> {
        if index == 0 || index > self.n {
            return Err(SchemeError::IndexOutOfRange(index));
        }
        Ok(())
    }

    pub fn indices(&self) -> impl Iterator<Item = u16> {
        1..=self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    Cipher,
    Signature,
    Randomness,
}

/// Arithmetic structure a scheme runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    Ed25519,
    Bn254,
    Rsa,
}

/// The six supported threshold schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "SG02")]
    Sg02,
    #[serde(rename = "BZ03")]
    Bz03,
    #[serde(rename = "SH00")]
    Sh00,
    #[serde(rename = "KG20")]
    Kg20,
    #[serde(rename = "BLS04")]
    Bls04,
    #[serde(rename = "CKS05")]
    Cks05,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::Sg02,
        SchemeId::Bz03,
        SchemeId::Sh00,
        SchemeId::Kg20,
        SchemeId::Bls04,
        SchemeId::Cks05,
    ];

    pub fn kind(self) -> SchemeKind {
        match self {
            SchemeId::Sg02 | SchemeId::Bz03 => SchemeKind::Cipher,
            SchemeId::Sh00 | SchemeId::Kg20 | SchemeId::Bls04 => SchemeKind::Signature,
            SchemeId::Cks05 => SchemeKind::Randomness,
        }
    }

    pub fn group(self) -> GroupTag {
        match self {
            SchemeId::Sg02 | SchemeId::Kg20 | SchemeId::Cks05 => GroupTag::Ed25519,
            SchemeId::Bz03 | SchemeId::Bls04 => GroupTag::Bn254,
            SchemeId::Sh00 => GroupTag::Rsa,
        }
    }

    /// Schemes whose shares are checked with a zero-knowledge proof rather
    /// than a pairing equation.
    pub fn verifies_with_proof(self) -> bool {
        !matches!(self, SchemeId::Bz03 | SchemeId::Bls04)
    }

    /// Communication rounds of the signing/decryption protocol without
    /// precomputation.
    pub fn rounds(self) -> u8 {
        match self {
            SchemeId::Kg20 => 2,
            _ => 1,
        }
    }

    /// Whether `combine` output is a function of the request and key alone.
    pub fn is_deterministic(self) -> bool {
        matches!(self, SchemeId::Sh00 | SchemeId::Bls04 | SchemeId::Cks05)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Sg02 => "SG02",
            SchemeId::Bz03 => "BZ03",
            SchemeId::Sh00 => "SH00",
            SchemeId::Kg20 => "KG20",
            SchemeId::Bls04 => "BLS04",
            SchemeId::Cks05 => "CKS05",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SchemeError::Malformed(format!("unknown scheme {s:?}")))
    }
}
