//! BZ03: pairing-based threshold cipher on BN254. Ciphertext validity and
//! decryption shares are both checked with pairing equations.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SchemeError};
use crate::groups::bn254::pairing_eq;
use crate::groups::{
    interpolate_in_exponent, shamir_share, BnScalar, FieldScalar, HashToGroup, PrimeGroup, G1, G2,
};
use crate::params::ThresholdParams;
use crate::request::{Encapsulation, ShareValue};
use crate::symmetric::DemKey;

const TAG_W: &[u8] = b"tcs/BZ03/tag-base";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    /// `x·P₂`.
    pub pk: G2,
    /// `x_i·P₁`; lives in G1 so shares in G2 can be paired against it.
    pub verification_keys: Vec<G1>,
}

pub fn deal<R: RngCore + CryptoRng>(params: &ThresholdParams, rng: &mut R) -> (PublicKey, Vec<BnScalar>) {
    let x = BnScalar::random(rng);
    let shares = shamir_share(x, params, rng);
    let pk = PublicKey {
        pk: G2::generator() * x,
        verification_keys: shares.iter().map(|s| G1::generator() * *s).collect(),
    };
    (pk, shares)
}

fn tag_base(u: &G2, label: &[u8]) -> G1 {
    let mut data = u.to_bytes();
    data.extend_from_slice(label);
    G1::hash_to_group(TAG_W, &data)
}

fn dem_key(shared: &G2, u: &G2) -> DemKey {
    DemKey::derive("tcs/BZ03", &shared.to_bytes(), &u.to_bytes())
}

pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    label: &[u8],
    plaintext: &[u8],
    rng: &mut R,
) -> (Encapsulation, Vec<u8>) {
    let r = BnScalar::random(rng);
    let u = G2::generator() * r;
    let v = tag_base(&u, label) * r;
    let payload = dem_key(&(pk.pk * r), &u).seal(label, plaintext);
    (Encapsulation::Bz03 { u, v }, payload)
}

/// `e(H(U, L), U) = e(V, P₂)`.
pub fn verify_ciphertext(label: &[u8], enc: &Encapsulation) -> Result<bool> {
    let Encapsulation::Bz03 { u, v } = enc else {
        return Err(SchemeError::Malformed("expected a BZ03 encapsulation".into()));
    };
    Ok(pairing_eq(&tag_base(u, label), u, v, &G2::generator()))
}

pub fn partial_decrypt(secret: &BnScalar, enc: &Encapsulation) -> Result<ShareValue> {
    let Encapsulation::Bz03 { u, .. } = enc else {
        return Err(SchemeError::Malformed("expected a BZ03 encapsulation".into()));
    };
    Ok(ShareValue::Bz03 { u_i: *u * *secret })
}

/// `e(vk_i, U) = e(P₁, U_i)`.
pub fn verify_share(pk: &PublicKey, enc: &Encapsulation, index: u16, value: &ShareValue) -> Result<bool> {
    let (Encapsulation::Bz03 { u, .. }, ShareValue::Bz03 { u_i }) = (enc, value) else {
        return Err(SchemeError::Malformed("expected BZ03 share and encapsulation".into()));
    };
    Ok(pairing_eq(&pk.verification_keys[index as usize - 1], u, &G1::generator(), u_i))
}

pub fn combine(
    params: &ThresholdParams,
    label: &[u8],
    enc: &Encapsulation,
    payload: &[u8],
    shares: &[(u16, &ShareValue)],
) -> Result<Vec<u8>> {
    let Encapsulation::Bz03 { u, .. } = enc else {
        return Err(SchemeError::Malformed("expected a BZ03 encapsulation".into()));
    };
    let points = shares
        .iter()
        .map(|(i, v)| match v {
            ShareValue::Bz03 { u_i } => Ok((*i, *u_i)),
            _ => Err(SchemeError::Malformed("expected a BZ03 share".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let shared = interpolate_in_exponent(params, &points)?;
    dem_key(&shared, u).open(label, payload)
}

pub fn decrypt_with_secret(secret: &BnScalar, label: &[u8], enc: &Encapsulation, payload: &[u8]) -> Result<Vec<u8>> {
    let Encapsulation::Bz03 { u, .. } = enc else {
        return Err(SchemeError::Malformed("expected a BZ03 encapsulation".into()));
    };
    dem_key(&(*u * *secret), u).open(label, payload)
}
