//! Scheme-agnostic entry points. Every function dispatches on the scheme
//! recorded in the key material.

use std::collections::BTreeSet;

use rand::{CryptoRng, RngCore};

use crate::error::{Result, SchemeError};
use crate::keys::{KeyShare, PublicKey, PublicKeyMaterial};
use crate::kg20::{FrostNonceCommitment, FrostNonces, SigningPackage};
use crate::params::{SchemeId, SchemeKind};
use crate::request::{
    Ciphertext, CoinValue, PartialResult, Request, RequestBinding, Signature, ThresholdOutput,
};
use crate::{bls04, bz03, cks05, kg20, sg02, sh00};

pub use crate::keys::{deal_keys, deal_keys_seeded};

fn unsupported(scheme: SchemeId, op: &'static str) -> SchemeError {
    SchemeError::Unsupported { scheme, op }
}

pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &PublicKeyMaterial,
    label: &[u8],
    plaintext: &[u8],
    rng: &mut R,
) -> Result<Ciphertext> {
    let (encapsulation, payload) = match &pk.key {
        PublicKey::Sg02(k) => sg02::encrypt(k, label, plaintext, rng),
        PublicKey::Bz03(k) => bz03::encrypt(k, label, plaintext, rng),
        _ => return Err(unsupported(pk.scheme, "encrypt")),
    };
    Ok(Ciphertext {
        scheme: pk.scheme,
        label: label.to_vec(),
        encapsulation,
        payload,
    })
}

/// `Ok(false)` for a well-formed but invalid ciphertext; `Err` when it
/// cannot be interpreted under this key.
pub fn verify_ciphertext(pk: &PublicKeyMaterial, c: &Ciphertext) -> Result<bool> {
    if c.scheme != pk.scheme {
        return Err(SchemeError::SchemeMismatch);
    }
    match &pk.key {
        PublicKey::Sg02(k) => sg02::verify_ciphertext(k, &c.label, &c.encapsulation),
        PublicKey::Bz03(_) => bz03::verify_ciphertext(&c.label, &c.encapsulation),
        _ => Err(unsupported(pk.scheme, "verify_ciphertext")),
    }
}

/// Refuses to release a share for an invalid ciphertext.
pub fn partial_decrypt<R: RngCore + CryptoRng>(
    share: &KeyShare,
    c: &Ciphertext,
    rng: &mut R,
) -> Result<PartialResult> {
    let pk = &share.public;
    if !verify_ciphertext(pk, c)? {
        return Err(SchemeError::InvalidCiphertext);
    }
    let binding = RequestBinding::compute(pk, &Request::Decrypt(c.clone()))?;
    let value = match &pk.key {
        PublicKey::Sg02(k) => {
            sg02::partial_decrypt(k, share.index, share.ed_secret()?, &binding, &c.encapsulation, rng)?
        }
        PublicKey::Bz03(_) => bz03::partial_decrypt(share.bn_secret()?, &c.encapsulation)?,
        _ => return Err(unsupported(pk.scheme, "partial_decrypt")),
    };
    Ok(PartialResult {
        scheme: pk.scheme,
        binding,
        index: share.index,
        value,
    })
}

pub fn sign_share<R: RngCore + CryptoRng>(
    share: &KeyShare,
    message: &[u8],
    rng: &mut R,
) -> Result<PartialResult> {
    let pk = &share.public;
    let binding = RequestBinding::compute(pk, &Request::Sign(message.to_vec()))?;
    let value = match &pk.key {
        PublicKey::Sh00(k) => sh00::sign_share(k, share.index, share.rsa_secret()?, &binding, message, rng),
        PublicKey::Bls04(_) => bls04::sign_share(share.bn_secret()?, message),
        _ => return Err(unsupported(pk.scheme, "sign_share")),
    };
    Ok(PartialResult {
        scheme: pk.scheme,
        binding,
        index: share.index,
        value,
    })
}

pub fn coin_share<R: RngCore + CryptoRng>(share: &KeyShare, name: &[u8], rng: &mut R) -> Result<PartialResult> {
    let pk = &share.public;
    let PublicKey::Cks05(k) = &pk.key else {
        return Err(unsupported(pk.scheme, "coin_share"));
    };
    let binding = RequestBinding::compute(pk, &Request::Coin(name.to_vec()))?;
    Ok(PartialResult {
        scheme: pk.scheme,
        binding,
        index: share.index,
        value: cks05::coin_share(k, share.index, share.ed_secret()?, &binding, name, rng),
    })
}

/// The single-round partial operation for `request`.
pub fn create_share<R: RngCore + CryptoRng>(
    share: &KeyShare,
    request: &Request,
    rng: &mut R,
) -> Result<PartialResult> {
    match request {
        Request::Decrypt(c) => partial_decrypt(share, c, rng),
        Request::Sign(m) => sign_share(share, m, rng),
        Request::Coin(name) => coin_share(share, name, rng),
    }
}

pub fn frost_round1<R: RngCore + CryptoRng>(share: &KeyShare, rng: &mut R) -> Result<FrostNonces> {
    if share.scheme != SchemeId::Kg20 {
        return Err(unsupported(share.scheme, "frost_round1"));
    }
    Ok(kg20::round1(share.index, rng))
}

pub fn frost_round2(
    share: &KeyShare,
    package: &SigningPackage,
    nonces: &mut FrostNonces,
) -> Result<PartialResult> {
    let pk = &share.public;
    let PublicKey::Kg20(k) = &pk.key else {
        return Err(unsupported(pk.scheme, "frost_round2"));
    };
    let binding = RequestBinding::compute(pk, &Request::Sign(package.message.clone()))?;
    let value = kg20::round2(&pk.params, k, share.index, share.ed_secret()?, package, nonces)?;
    Ok(PartialResult {
        scheme: pk.scheme,
        binding,
        index: share.index,
        value,
    })
}

/// Checks a nonce commitment is for a configured party. Group membership
/// is already enforced by decoding.
pub fn verify_commitment(pk: &PublicKeyMaterial, c: &FrostNonceCommitment) -> Result<()> {
    if pk.scheme != SchemeId::Kg20 {
        return Err(unsupported(pk.scheme, "verify_commitment"));
    }
    pk.params.check_index(c.index)
}

fn check_envelope(pk: &PublicKeyMaterial, binding: &RequestBinding, p: &PartialResult) -> Result<bool> {
    if p.scheme != pk.scheme || p.value.scheme() != pk.scheme {
        return Err(SchemeError::SchemeMismatch);
    }
    pk.params.check_index(p.index)?;
    Ok(p.binding == *binding)
}

/// Share verification for the single-round schemes.
pub fn verify_share(
    pk: &PublicKeyMaterial,
    binding: &RequestBinding,
    request: &Request,
    p: &PartialResult,
) -> Result<bool> {
    if !check_envelope(pk, binding, p)? {
        return Ok(false);
    }
    match (&pk.key, request) {
        (PublicKey::Sg02(k), Request::Decrypt(c)) => {
            sg02::verify_share(k, binding, &c.encapsulation, p.index, &p.value)
        }
        (PublicKey::Bz03(k), Request::Decrypt(c)) => bz03::verify_share(k, &c.encapsulation, p.index, &p.value),
        (PublicKey::Sh00(k), Request::Sign(m)) => sh00::verify_share(k, binding, m, p.index, &p.value),
        (PublicKey::Bls04(k), Request::Sign(m)) => bls04::verify_share(k, m, p.index, &p.value),
        (PublicKey::Cks05(k), Request::Coin(name)) => cks05::verify_share(k, binding, name, p.index, &p.value),
        (PublicKey::Kg20(_), _) => Err(unsupported(pk.scheme, "verify_share without a signing package")),
        _ => Err(SchemeError::SchemeMismatch),
    }
}

/// Round-2 response verification for KG20.
pub fn verify_frost_share(
    pk: &PublicKeyMaterial,
    binding: &RequestBinding,
    package: &SigningPackage,
    p: &PartialResult,
) -> Result<bool> {
    let PublicKey::Kg20(k) = &pk.key else {
        return Err(unsupported(pk.scheme, "verify_frost_share"));
    };
    if !check_envelope(pk, binding, p)? {
        return Ok(false);
    }
    kg20::verify_response(&pk.params, k, package, p.index, &p.value)
}

fn select_shares<'a>(
    pk: &PublicKeyMaterial,
    binding: &RequestBinding,
    shares: &'a [PartialResult],
) -> Result<Vec<(u16, &'a crate::request::ShareValue)>> {
    let mut seen = BTreeSet::new();
    for s in shares {
        if s.binding != *binding {
            return Err(SchemeError::BindingMismatch);
        }
        if s.scheme != pk.scheme {
            return Err(SchemeError::SchemeMismatch);
        }
        pk.params.check_index(s.index)?;
        if !seen.insert(s.index) {
            return Err(SchemeError::DuplicateIndex(s.index));
        }
    }
    let needed = pk.params.quorum();
    if shares.len() < needed {
        return Err(SchemeError::InsufficientShares {
            needed,
            got: shares.len(),
        });
    }
    Ok(shares[..needed].iter().map(|s| (s.index, &s.value)).collect())
}

/// Assembles the output from at least `t+1` verified shares. Only the first
/// `t+1` are used.
pub fn combine(
    pk: &PublicKeyMaterial,
    binding: &RequestBinding,
    request: &Request,
    shares: &[PartialResult],
) -> Result<ThresholdOutput> {
    let selected = select_shares(pk, binding, shares)?;
    let params = &pk.params;
    match (&pk.key, request) {
        (PublicKey::Sg02(_), Request::Decrypt(c)) => Ok(ThresholdOutput::Plaintext(sg02::combine(
            params,
            &c.label,
            &c.encapsulation,
            &c.payload,
            &selected,
        )?)),
        (PublicKey::Bz03(_), Request::Decrypt(c)) => Ok(ThresholdOutput::Plaintext(bz03::combine(
            params,
            &c.label,
            &c.encapsulation,
            &c.payload,
            &selected,
        )?)),
        (PublicKey::Sh00(k), Request::Sign(m)) => Ok(ThresholdOutput::Signature(Signature::Sh00(
            sh00::combine(params, k, m, &selected)?,
        ))),
        (PublicKey::Bls04(_), Request::Sign(_)) => Ok(ThresholdOutput::Signature(Signature::Bls04(
            bls04::combine(params, &selected)?,
        ))),
        (PublicKey::Cks05(_), Request::Coin(_)) => Ok(ThresholdOutput::Coin(CoinValue {
            value: cks05::combine(params, &selected)?,
            evidence: shares[..params.quorum()].to_vec(),
        })),
        (PublicKey::Kg20(_), _) => Err(unsupported(pk.scheme, "combine without a signing package")),
        _ => Err(SchemeError::SchemeMismatch),
    }
}

/// Aggregates the responses of the whole signing set.
pub fn combine_frost(
    pk: &PublicKeyMaterial,
    binding: &RequestBinding,
    package: &SigningPackage,
    shares: &[PartialResult],
) -> Result<ThresholdOutput> {
    if pk.scheme != SchemeId::Kg20 {
        return Err(unsupported(pk.scheme, "combine_frost"));
    }
    for s in shares {
        if s.binding != *binding {
            return Err(SchemeError::BindingMismatch);
        }
    }
    let pairs: Vec<_> = shares.iter().map(|s| (s.index, &s.value)).collect();
    let (r, z) = kg20::aggregate(package, &pairs)?;
    Ok(ThresholdOutput::Signature(Signature::Kg20 { r, z }))
}

/// Checks a final output against the request it claims to answer.
pub fn verify_result(pk: &PublicKeyMaterial, request: &Request, output: &ThresholdOutput) -> bool {
    match (&pk.key, request, output) {
        // Authenticated decryption already succeeded when a plaintext exists.
        (PublicKey::Sg02(_) | PublicKey::Bz03(_), Request::Decrypt(_), ThresholdOutput::Plaintext(_)) => true,
        (PublicKey::Sh00(k), Request::Sign(m), ThresholdOutput::Signature(Signature::Sh00(y))) => {
            sh00::verify(&k.modulus, m, y)
        }
        (PublicKey::Bls04(k), Request::Sign(m), ThresholdOutput::Signature(Signature::Bls04(s))) => {
            bls04::verify(&k.pk, m, s)
        }
        (PublicKey::Kg20(k), Request::Sign(m), ThresholdOutput::Signature(Signature::Kg20 { r, z })) => {
            kg20::verify(&k.pk, m, r, z)
        }
        (PublicKey::Cks05(_), Request::Coin(_), ThresholdOutput::Coin(coin)) => verify_coin(pk, request, coin),
        _ => false,
    }
}

fn verify_coin(pk: &PublicKeyMaterial, request: &Request, coin: &CoinValue) -> bool {
    let Ok(binding) = RequestBinding::compute(pk, request) else {
        return false;
    };
    if coin.evidence.len() < pk.params.quorum() {
        return false;
    }
    let all_valid = coin
        .evidence
        .iter()
        .all(|s| matches!(verify_share(pk, &binding, request, s), Ok(true)));
    all_valid
        && matches!(
            combine(pk, &binding, request, &coin.evidence),
            Ok(ThresholdOutput::Coin(c)) if c.value == coin.value
        )
}

/// Which kind of request a key can serve.
pub fn request_kind(pk: &PublicKeyMaterial) -> SchemeKind {
    pk.scheme.kind()
}
