//! Key material produced by the trusted dealer.

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::biguint_b64;
use crate::error::{Result, SchemeError};
use crate::groups::rsa::RsaBits;
use crate::groups::{BnScalar, EdPoint, EdScalar, PrimeGroup, G1, G2};
use crate::params::{SchemeId, ThresholdParams};
use crate::{bls04, bz03, cks05, kg20, sg02, sh00};

/// Hash family every scheme instance uses internally.
pub const HASH_FAMILY: &str = "sha2";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PublicKey {
    Sg02(sg02::PublicKey),
    Bz03(bz03::PublicKey),
    Sh00(sh00::PublicKey),
    Kg20(kg20::PublicKey),
    Bls04(bls04::PublicKey),
    Cks05(cks05::PublicKey),
}

impl PublicKey {
    fn scheme(&self) -> SchemeId {
        match self {
            PublicKey::Sg02(_) => SchemeId::Sg02,
            PublicKey::Bz03(_) => SchemeId::Bz03,
            PublicKey::Sh00(_) => SchemeId::Sh00,
            PublicKey::Kg20(_) => SchemeId::Kg20,
            PublicKey::Bls04(_) => SchemeId::Bls04,
            PublicKey::Cks05(_) => SchemeId::Cks05,
        }
    }

    fn verification_key_count(&self) -> usize {
        match self {
            PublicKey::Sg02(k) => k.verification_keys.len(),
            PublicKey::Bz03(k) => k.verification_keys.len(),
            PublicKey::Sh00(k) => k.verification_keys.len(),
            PublicKey::Kg20(k) => k.verification_keys.len(),
            PublicKey::Bls04(k) => k.verification_keys.len(),
            PublicKey::Cks05(k) => k.verification_keys.len(),
        }
    }
}

/// Public key of one scheme instance, shared by all parties and clients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKeyMaterial {
    pub scheme: SchemeId,
    pub params: ThresholdParams,
    pub hash: String,
    pub key: PublicKey,
}

impl PublicKeyMaterial {
    pub fn validate(&self) -> Result<()> {
        ThresholdParams::new(self.params.n, self.params.t)?;
        if self.key.scheme() != self.scheme {
            return Err(SchemeError::SchemeMismatch);
        }
        if self.key.verification_key_count() != self.params.n as usize {
            return Err(SchemeError::Malformed(format!(
                "{} verification keys for n = {}",
                self.key.verification_key_count(),
                self.params.n
            )));
        }
        if self.hash != HASH_FAMILY {
            return Err(SchemeError::Malformed(format!("unknown hash family {}", self.hash)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("key serialization is infallible")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("key serialization is infallible")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let pk: Self = serde_json::from_slice(bytes).map_err(|e| SchemeError::Malformed(e.to_string()))?;
        pk.validate()?;
        Ok(pk)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.to_json()).into()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecretValue {
    Ed(EdScalar),
    Bn(BnScalar),
    Rsa(#[serde(with = "biguint_b64")] BigUint),
}

/// One party's secret share together with the public key it belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyShare {
    pub scheme: SchemeId,
    pub index: u16,
    pub secret: SecretValue,
    pub public: PublicKeyMaterial,
}

impl KeyShare {
    /// Checks the index range and that the secret matches the published
    /// verification key of this index.
    pub fn validate(&self) -> Result<()> {
        self.public.validate()?;
        if self.scheme != self.public.scheme {
            return Err(SchemeError::SchemeMismatch);
        }
        self.public.params.check_index(self.index)?;
        let k = self.index as usize - 1;
        let ok = match (&self.public.key, &self.secret) {
            (PublicKey::Sg02(pk), SecretValue::Ed(s)) => pk.verification_keys[k] == EdPoint::generator() * *s,
            (PublicKey::Kg20(pk), SecretValue::Ed(s)) => pk.verification_keys[k] == EdPoint::generator() * *s,
            (PublicKey::Cks05(pk), SecretValue::Ed(s)) => pk.verification_keys[k] == EdPoint::generator() * *s,
            (PublicKey::Bz03(pk), SecretValue::Bn(s)) => pk.verification_keys[k] == G1::generator() * *s,
            (PublicKey::Bls04(pk), SecretValue::Bn(s)) => pk.verification_keys[k] == G2::generator() * *s,
            (PublicKey::Sh00(pk), SecretValue::Rsa(s)) => {
                pk.verification_keys[k] == pk.v.modpow(s, &pk.modulus.n)
            }
            _ => return Err(SchemeError::SchemeMismatch),
        };
        if ok {
            Ok(())
        } else {
            Err(SchemeError::KeyGeneration(format!(
                "share {} does not match its verification key",
                self.index
            )))
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("key serialization is infallible")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let s: Self = serde_json::from_slice(bytes).map_err(|e| SchemeError::Malformed(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn ed_secret(&self) -> Result<&EdScalar> {
        match &self.secret {
            SecretValue::Ed(s) => Ok(s),
            _ => Err(SchemeError::SchemeMismatch),
        }
    }

    pub fn bn_secret(&self) -> Result<&BnScalar> {
        match &self.secret {
            SecretValue::Bn(s) => Ok(s),
            _ => Err(SchemeError::SchemeMismatch),
        }
    }

    pub fn rsa_secret(&self) -> Result<&BigUint> {
        match &self.secret {
            SecretValue::Rsa(s) => Ok(s),
            _ => Err(SchemeError::SchemeMismatch),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DealOptions {
    pub rsa_bits: RsaBits,
    /// The 512-bit modulus is only for tests and must be opted into.
    pub allow_test_modulus: bool,
}

impl Default for DealOptions {
    fn default() -> Self {
        DealOptions {
            rsa_bits: RsaBits::B2048,
            allow_test_modulus: false,
        }
    }
}

impl DealOptions {
    pub fn test() -> Self {
        DealOptions {
            rsa_bits: RsaBits::Test512,
            allow_test_modulus: true,
        }
    }
}

pub fn deal_keys<R: RngCore + CryptoRng>(
    scheme: SchemeId,
    params: ThresholdParams,
    options: &DealOptions,
    rng: &mut R,
) -> Result<(PublicKeyMaterial, Vec<KeyShare>)> {
    let params = ThresholdParams::new(params.n, params.t)?;
    let (key, secrets): (PublicKey, Vec<SecretValue>) = match scheme {
        SchemeId::Sg02 => {
            let (pk, s) = sg02::deal(&params, rng);
            (PublicKey::Sg02(pk), s.into_iter().map(SecretValue::Ed).collect())
        }
        SchemeId::Bz03 => {
            let (pk, s) = bz03::deal(&params, rng);
            (PublicKey::Bz03(pk), s.into_iter().map(SecretValue::Bn).collect())
        }
        SchemeId::Sh00 => {
            if options.rsa_bits == RsaBits::Test512 && !options.allow_test_modulus {
                return Err(SchemeError::KeyGeneration(
                    "512-bit modulus requires the test-modulus opt-in".into(),
                ));
            }
            let (pk, s) = sh00::deal(&params, options.rsa_bits, rng)?;
            (PublicKey::Sh00(pk), s.into_iter().map(SecretValue::Rsa).collect())
        }
        SchemeId::Kg20 => {
            let (pk, s) = kg20::deal(&params, rng);
            (PublicKey::Kg20(pk), s.into_iter().map(SecretValue::Ed).collect())
        }
        SchemeId::Bls04 => {
            let (pk, s) = bls04::deal(&params, rng);
            (PublicKey::Bls04(pk), s.into_iter().map(SecretValue::Bn).collect())
        }
        SchemeId::Cks05 => {
            let (pk, s) = cks05::deal(&params, rng);
            (PublicKey::Cks05(pk), s.into_iter().map(SecretValue::Ed).collect())
        }
    };
    let public = PublicKeyMaterial {
        scheme,
        params,
        hash: HASH_FAMILY.to_string(),
        key,
    };
    let shares = secrets
        .into_iter()
        .zip(params.indices())
        .map(|(secret, index)| KeyShare {
            scheme,
            index,
            secret,
            public: public.clone(),
        })
        .collect();
    Ok((public, shares))
}

/// Deterministic dealing from a 32-byte seed.
pub fn deal_keys_seeded(
    scheme: SchemeId,
    params: ThresholdParams,
    options: &DealOptions,
    seed: [u8; 32],
) -> Result<(PublicKeyMaterial, Vec<KeyShare>)> {
    deal_keys(scheme, params, options, &mut ChaCha20Rng::from_seed(seed))
}
