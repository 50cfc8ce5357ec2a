//! CKS05: Diffie–Hellman based threshold coin tossing. The coin named `C`
//! is `H(x·Ĉ)` with `Ĉ = H_G(C)`; shares carry DLEQ validity proofs.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dleq::DleqStatement;
use crate::error::{Result, SchemeError};
use crate::groups::{
    interpolate_in_exponent, shamir_share, EdPoint, EdScalar, FieldScalar, HashToGroup, PrimeGroup,
};
use crate::params::ThresholdParams;
use crate::request::{RequestBinding, ShareValue};

const TAG_COIN: &[u8] = b"tcs/CKS05/coin-base";
const TAG_SHARE: &[u8] = b"tcs/CKS05/share-proof";
const TAG_VALUE: &[u8] = b"tcs/CKS05/value";

/// Coin values are 32 bytes.
pub const COIN_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    pub pk: EdPoint,
    pub verification_keys: Vec<EdPoint>,
}

pub fn deal<R: RngCore + CryptoRng>(params: &ThresholdParams, rng: &mut R) -> (PublicKey, Vec<EdScalar>) {
    let x = EdScalar::random(rng);
    let shares = shamir_share(x, params, rng);
    let g = EdPoint::generator();
    let pk = PublicKey {
        pk: g * x,
        verification_keys: shares.iter().map(|s| g * *s).collect(),
    };
    (pk, shares)
}

pub fn coin_base(name: &[u8]) -> EdPoint {
    EdPoint::hash_to_group(TAG_COIN, name)
}

/// Hash of the combined element `x·Ĉ`.
pub fn coin_value(combined: &EdPoint) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(TAG_VALUE);
    h.update(combined.to_bytes());
    h.finalize().to_vec()
}

fn share_context(binding: &RequestBinding, index: u16) -> Vec<u8> {
    let mut ctx = binding.0.to_vec();
    ctx.extend_from_slice(&index.to_be_bytes());
    ctx
}

pub fn coin_share<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    index: u16,
    secret: &EdScalar,
    binding: &RequestBinding,
    name: &[u8],
    rng: &mut R,
) -> ShareValue {
    let base = coin_base(name);
    let g_i = base * *secret;
    let ctx = share_context(binding, index);
    let st = DleqStatement {
        g: EdPoint::generator(),
        x_g: pk.verification_keys[index as usize - 1],
        h: base,
        x_h: g_i,
        context: &ctx,
    };
    let proof = st.prove(TAG_SHARE, secret, rng);
    ShareValue::Cks05 { g_i, proof }
}

pub fn verify_share(
    pk: &PublicKey,
    binding: &RequestBinding,
    name: &[u8],
    index: u16,
    value: &ShareValue,
) -> Result<bool> {
    let ShareValue::Cks05 { g_i, proof } = value else {
        return Err(SchemeError::Malformed("expected a CKS05 share".into()));
    };
    let ctx = share_context(binding, index);
    let st = DleqStatement {
        g: EdPoint::generator(),
        x_g: pk.verification_keys[index as usize - 1],
        h: coin_base(name),
        x_h: *g_i,
        context: &ctx,
    };
    Ok(st.verify(TAG_SHARE, proof))
}

pub fn combine(params: &ThresholdParams, shares: &[(u16, &ShareValue)]) -> Result<Vec<u8>> {
    let points = shares
        .iter()
        .map(|(i, v)| match v {
            ShareValue::Cks05 { g_i, .. } => Ok((*i, *g_i)),
            _ => Err(SchemeError::Malformed("expected a CKS05 share".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(coin_value(&interpolate_in_exponent(params, &points)?))
}
