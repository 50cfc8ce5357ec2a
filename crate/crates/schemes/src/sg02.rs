//! SG02: TDH2 threshold ElGamal over the Ed25519 group with a validity
//! proof on the ciphertext and DLEQ proofs on decryption shares.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::dleq::DleqStatement;
use crate::error::{Result, SchemeError};
use crate::groups::{
    hash_to_scalar, interpolate_in_exponent, shamir_share, EdPoint, EdScalar, FieldScalar,
    HashToGroup, PrimeGroup, Transcript,
};
use crate::params::ThresholdParams;
use crate::request::{Encapsulation, RequestBinding, ShareValue};
use crate::symmetric::DemKey;

const TAG_GBAR: &[u8] = b"tcs/SG02/second-generator";
const TAG_VALIDITY: &[u8] = b"tcs/SG02/validity";
const TAG_SHARE: &[u8] = b"tcs/SG02/share-proof";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    /// `h = x·G`.
    pub h: EdPoint,
    /// Second generator with unknown discrete log to `G`.
    pub g_bar: EdPoint,
    pub verification_keys: Vec<EdPoint>,
}

pub fn second_generator() -> EdPoint {
    EdPoint::hash_to_group(TAG_GBAR, b"")
}

pub fn deal<R: RngCore + CryptoRng>(params: &ThresholdParams, rng: &mut R) -> (PublicKey, Vec<EdScalar>) {
    let x = EdScalar::random(rng);
    let shares = shamir_share(x, params, rng);
    let g = EdPoint::generator();
    let pk = PublicKey {
        h: g * x,
        g_bar: second_generator(),
        verification_keys: shares.iter().map(|s| g * *s).collect(),
    };
    (pk, shares)
}

fn validity_challenge(label: &[u8], u: &EdPoint, w: &EdPoint, u_bar: &EdPoint, w_bar: &EdPoint) -> EdScalar {
    let mut tr = Transcript::new();
    tr.append(label)
        .append_point(u)
        .append_point(w)
        .append_point(u_bar)
        .append_point(w_bar);
    hash_to_scalar(TAG_VALIDITY, tr.as_bytes())
}

fn dem_key(shared: &EdPoint, u: &EdPoint, u_bar: &EdPoint) -> DemKey {
    DemKey::derive("tcs/SG02", &shared.to_bytes(), &[u.to_bytes(), u_bar.to_bytes()].concat())
}

pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    label: &[u8],
    plaintext: &[u8],
    rng: &mut R,
) -> (Encapsulation, Vec<u8>) {
    let g = EdPoint::generator();
    let r = EdScalar::random(rng);
    let s = EdScalar::random(rng);
    let u = g * r;
    let u_bar = pk.g_bar * r;
    let w = g * s;
    let w_bar = pk.g_bar * s;
    let e = validity_challenge(label, &u, &w, &u_bar, &w_bar);
    let f = s + r * e;
    let payload = dem_key(&(pk.h * r), &u, &u_bar).seal(label, plaintext);
    (Encapsulation::Sg02 { u, u_bar, e, f }, payload)
}

/// Checks that `(G, Ḡ, u, ū)` is a DDH tuple via the attached proof.
pub fn verify_ciphertext(pk: &PublicKey, label: &[u8], enc: &Encapsulation) -> Result<bool> {
    let Encapsulation::Sg02 { u, u_bar, e, f } = enc else {
        return Err(SchemeError::Malformed("expected an SG02 encapsulation".into()));
    };
    let w = EdPoint::generator() * *f - *u * *e;
    let w_bar = pk.g_bar * *f - *u_bar * *e;
    Ok(validity_challenge(label, u, &w, u_bar, &w_bar) == *e)
}

fn share_context(binding: &RequestBinding, index: u16) -> Vec<u8> {
    let mut ctx = binding.0.to_vec();
    ctx.extend_from_slice(&index.to_be_bytes());
    ctx
}

pub fn partial_decrypt<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    index: u16,
    secret: &EdScalar,
    binding: &RequestBinding,
    enc: &Encapsulation,
    rng: &mut R,
) -> Result<ShareValue> {
    let Encapsulation::Sg02 { u, .. } = enc else {
        return Err(SchemeError::Malformed("expected an SG02 encapsulation".into()));
    };
    let u_i = *u * *secret;
    let ctx = share_context(binding, index);
    let st = DleqStatement {
        g: EdPoint::generator(),
        x_g: pk.verification_keys[index as usize - 1],
        h: *u,
        x_h: u_i,
        context: &ctx,
    };
    let proof = st.prove(TAG_SHARE, secret, rng);
    Ok(ShareValue::Sg02 { u_i, proof })
}

pub fn verify_share(
    pk: &PublicKey,
    binding: &RequestBinding,
    enc: &Encapsulation,
    index: u16,
    value: &ShareValue,
) -> Result<bool> {
    let (Encapsulation::Sg02 { u, .. }, ShareValue::Sg02 { u_i, proof }) = (enc, value) else {
        return Err(SchemeError::Malformed("expected SG02 share and encapsulation".into()));
    };
    let ctx = share_context(binding, index);
    let st = DleqStatement {
        g: EdPoint::generator(),
        x_g: pk.verification_keys[index as usize - 1],
        h: *u,
        x_h: *u_i,
        context: &ctx,
    };
    Ok(st.verify(TAG_SHARE, proof))
}

/// Recovers `r·h` from verified shares and opens the payload.
pub fn combine(
    params: &ThresholdParams,
    label: &[u8],
    enc: &Encapsulation,
    payload: &[u8],
    shares: &[(u16, &ShareValue)],
) -> Result<Vec<u8>> {
    let Encapsulation::Sg02 { u, u_bar, .. } = enc else {
        return Err(SchemeError::Malformed("expected an SG02 encapsulation".into()));
    };
    let points = shares
        .iter()
        .map(|(i, v)| match v {
            ShareValue::Sg02 { u_i, .. } => Ok((*i, *u_i)),
            _ => Err(SchemeError::Malformed("expected an SG02 share".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let shared = interpolate_in_exponent(params, &points)?;
    dem_key(&shared, u, u_bar).open(label, payload)
}

/// Centralised decryption with the full secret key (test oracle).
pub fn decrypt_with_secret(secret: &EdScalar, label: &[u8], enc: &Encapsulation, payload: &[u8]) -> Result<Vec<u8>> {
    let Encapsulation::Sg02 { u, u_bar, .. } = enc else {
        return Err(SchemeError::Malformed("expected an SG02 encapsulation".into()));
    };
    dem_key(&(*u * *secret), u, u_bar).open(label, payload)
}
