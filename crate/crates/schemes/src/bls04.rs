//! BLS04: threshold BLS signatures on BN254, signatures in G1 and keys in G2.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SchemeError};
use crate::groups::bn254::pairing_eq;
use crate::groups::{
    interpolate_in_exponent, shamir_share, BnScalar, FieldScalar, HashToGroup, PrimeGroup, G1, G2,
};
use crate::params::ThresholdParams;
use crate::request::ShareValue;

const TAG_MSG: &[u8] = b"tcs/BLS04/message";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    pub pk: G2,
    pub verification_keys: Vec<G2>,
}

pub fn deal<R: RngCore + CryptoRng>(params: &ThresholdParams, rng: &mut R) -> (PublicKey, Vec<BnScalar>) {
    let x = BnScalar::random(rng);
    let shares = shamir_share(x, params, rng);
    let pk = PublicKey {
        pk: G2::generator() * x,
        verification_keys: shares.iter().map(|s| G2::generator() * *s).collect(),
    };
    (pk, shares)
}

pub fn hash_message(message: &[u8]) -> G1 {
    G1::hash_to_group(TAG_MSG, message)
}

pub fn sign_share(secret: &BnScalar, message: &[u8]) -> ShareValue {
    ShareValue::Bls04 {
        sigma_i: hash_message(message) * *secret,
    }
}

/// `e(σ_i, P₂) = e(H(m), vk_i)`.
pub fn verify_share(pk: &PublicKey, message: &[u8], index: u16, value: &ShareValue) -> Result<bool> {
    let ShareValue::Bls04 { sigma_i } = value else {
        return Err(SchemeError::Malformed("expected a BLS04 share".into()));
    };
    Ok(pairing_eq(
        sigma_i,
        &G2::generator(),
        &hash_message(message),
        &pk.verification_keys[index as usize - 1],
    ))
}

pub fn combine(params: &ThresholdParams, shares: &[(u16, &ShareValue)]) -> Result<G1> {
    let points = shares
        .iter()
        .map(|(i, v)| match v {
            ShareValue::Bls04 { sigma_i } => Ok((*i, *sigma_i)),
            _ => Err(SchemeError::Malformed("expected a BLS04 share".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    interpolate_in_exponent(params, &points)
}

/// Plain BLS verification `e(σ, P₂) = e(H(m), PK)`.
pub fn verify(pk: &G2, message: &[u8], sigma: &G1) -> bool {
    pairing_eq(sigma, &G2::generator(), &hash_message(message), pk)
}
