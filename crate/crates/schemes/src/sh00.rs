//! SH00: Shoup's robust threshold RSA signatures.
//!
//! The signing exponent `d` is shared over `Z_m` with `m = p'q'`. Shares are
//! `x^{2Δs_i}` for the padded message hash `x`, each with a proof of equal
//! discrete logs against `v^{s_i}` in the group of squares.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::{biguint_b64, biguint_vec_b64};
use crate::error::{Result, SchemeError};
use crate::groups::check_subset;
use crate::groups::rsa::{
    bezout, factorial, generate_modulus, mod_inverse, mod_pow_signed, scaled_lagrange, RsaBits,
    RsaModulus,
};
use crate::params::ThresholdParams;
use crate::request::{RequestBinding, ShareValue};

const TAG_FDH: &[u8] = b"tcs/SH00/fdh";
const TAG_PROOF: &[u8] = b"tcs/SH00/share-proof";

/// Identifier of the message-hash construction, recorded in the key.
pub const FDH_SHA256_CTR: &str = "sha256-ctr";

/// Challenge width in bits.
const CHALLENGE_BITS: u64 = 128;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    pub modulus: RsaModulus,
    /// Random square generating the verification subgroup.
    #[serde(with = "biguint_b64")]
    pub v: BigUint,
    /// `v^{s_i} mod N`.
    #[serde(with = "biguint_vec_b64")]
    pub verification_keys: Vec<BigUint>,
    /// `Δ = n!`.
    #[serde(with = "biguint_b64")]
    pub delta: BigUint,
    pub message_hash: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsaShareProof {
    #[serde(with = "biguint_b64")]
    pub c: BigUint,
    #[serde(with = "biguint_b64")]
    pub z: BigUint,
}

pub fn deal<R: RngCore + CryptoRng>(
    params: &ThresholdParams,
    bits: RsaBits,
    rng: &mut R,
) -> Result<(PublicKey, Vec<BigUint>)> {
    if params.n as u32 >= crate::groups::rsa::PUBLIC_EXPONENT {
        return Err(SchemeError::KeyGeneration("public exponent must exceed n".into()));
    }
    let secret = generate_modulus(bits, rng);
    let n_mod = &secret.modulus.n;
    let m = &secret.m;
    let d = mod_inverse(&secret.modulus.e, m)?;

    let mut coeffs = vec![d];
    coeffs.extend((0..params.t).map(|_| rng.gen_biguint_below(m)));
    let shares: Vec<BigUint> = params
        .indices()
        .map(|i| {
            let x = BigUint::from(i);
            coeffs.iter().rev().fold(BigUint::zero(), |acc, c| (acc * &x + c) % m)
        })
        .collect();

    let v = loop {
        let r = rng.gen_biguint_below(n_mod);
        if r > BigUint::one() && num_integer::Integer::gcd(&r, n_mod).is_one() {
            break (&r * &r) % n_mod;
        }
    };
    let pk = PublicKey {
        verification_keys: shares.iter().map(|s| v.modpow(s, n_mod)).collect(),
        v,
        delta: factorial(params.n),
        modulus: secret.modulus,
        message_hash: FDH_SHA256_CTR.to_string(),
    };
    Ok((pk, shares))
}

/// Counter-mode SHA-256 expansion of the message to the modulus width,
/// reduced mod N.
pub fn hash_message(modulus: &RsaModulus, message: &[u8]) -> BigUint {
    let width = modulus.byte_len();
    let mut out = Vec::with_capacity(width + 32);
    let mut counter: u32 = 0;
    while out.len() < width {
        let mut h = Sha256::new();
        h.update(TAG_FDH);
        h.update(counter.to_be_bytes());
        h.update((message.len() as u64).to_be_bytes());
        h.update(message);
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(width);
    BigUint::from_bytes_be(&out) % &modulus.n
}

#[allow(clippy::too_many_arguments)]
fn proof_challenge(
    binding: &RequestBinding,
    index: u16,
    v: &BigUint,
    x_tilde: &BigUint,
    v_i: &BigUint,
    x_i_sq: &BigUint,
    v_r: &BigUint,
    x_r: &BigUint,
) -> BigUint {
    let mut h = Sha256::new();
    h.update(TAG_PROOF);
    h.update(binding.0);
    h.update(index.to_be_bytes());
    for part in [v, x_tilde, v_i, x_i_sq, v_r, x_r] {
        let b = part.to_bytes_be();
        h.update((b.len() as u32).to_be_bytes());
        h.update(&b);
    }
    let digest = h.finalize();
    BigUint::from_bytes_be(&digest[..(CHALLENGE_BITS / 8) as usize])
}

pub fn sign_share<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    index: u16,
    secret: &BigUint,
    binding: &RequestBinding,
    message: &[u8],
    rng: &mut R,
) -> ShareValue {
    let n = &pk.modulus.n;
    let x = hash_message(&pk.modulus, message);
    let two_delta = &pk.delta << 1u8;
    let x_i = x.modpow(&(&two_delta * secret), n);

    let x_tilde = x.modpow(&(&pk.delta << 2u8), n);
    let x_i_sq = (&x_i * &x_i) % n;
    let r_bits = n.bits() + 2 * CHALLENGE_BITS;
    let r = rng.gen_biguint(r_bits);
    let v_r = pk.v.modpow(&r, n);
    let x_r = x_tilde.modpow(&r, n);
    let v_i = &pk.verification_keys[index as usize - 1];
    let c = proof_challenge(binding, index, &pk.v, &x_tilde, v_i, &x_i_sq, &v_r, &x_r);
    let z = secret * &c + r;
    ShareValue::Sh00 {
        x_i,
        proof: RsaShareProof { c, z },
    }
}

pub fn verify_share(
    pk: &PublicKey,
    binding: &RequestBinding,
    message: &[u8],
    index: u16,
    value: &ShareValue,
) -> Result<bool> {
    let ShareValue::Sh00 { x_i, proof } = value else {
        return Err(SchemeError::Malformed("expected an SH00 share".into()));
    };
    let n = &pk.modulus.n;
    if x_i.is_zero() || x_i >= n {
        return Ok(false);
    }
    let x = hash_message(&pk.modulus, message);
    let x_tilde = x.modpow(&(&pk.delta << 2u8), n);
    let x_i_sq = (x_i * x_i) % n;
    let v_i = &pk.verification_keys[index as usize - 1];
    let neg_c = -BigInt::from(proof.c.clone());
    let (Ok(v_i_inv_c), Ok(x_i_inv_2c)) = (
        mod_pow_signed(v_i, &neg_c, n),
        mod_pow_signed(&x_i_sq, &neg_c, n),
    ) else {
        return Ok(false);
    };
    let v_r = (pk.v.modpow(&proof.z, n) * v_i_inv_c) % n;
    let x_r = (x_tilde.modpow(&proof.z, n) * x_i_inv_2c) % n;
    Ok(proof_challenge(binding, index, &pk.v, &x_tilde, v_i, &x_i_sq, &v_r, &x_r) == proof.c)
}

/// Assembles `y` with `y^e ≡ x (mod N)` from `t+1` verified shares.
pub fn combine(
    params: &ThresholdParams,
    pk: &PublicKey,
    message: &[u8],
    shares: &[(u16, &ShareValue)],
) -> Result<BigUint> {
    let subset: Vec<u16> = shares.iter().map(|(i, _)| *i).collect();
    check_subset(params, &subset)?;
    let n = &pk.modulus.n;
    let mut w = BigUint::one();
    for (i, value) in shares {
        let ShareValue::Sh00 { x_i, .. } = value else {
            return Err(SchemeError::Malformed("expected an SH00 share".into()));
        };
        let lambda = scaled_lagrange(&pk.delta, &subset, *i) * 2;
        w = (w * mod_pow_signed(x_i, &lambda, n)?) % n;
    }
    // w = x^{e'·d} with e' = 4Δ²; strip e' with a·e' + b·e = 1.
    let e_prime = (&pk.delta * &pk.delta) << 2u8;
    let (a, b, g) = bezout(&e_prime, &pk.modulus.e);
    if !g.is_one() {
        return Err(SchemeError::Malformed("public exponent shares a factor with 4Δ²".into()));
    }
    let x = hash_message(&pk.modulus, message);
    let y = (mod_pow_signed(&w, &a, n)? * mod_pow_signed(&x, &b, n)?) % n;
    Ok(y)
}

/// Textbook RSA verification `y^e ≡ H(m) (mod N)`.
pub fn verify(modulus: &RsaModulus, message: &[u8], signature: &BigUint) -> bool {
    signature < &modulus.n && signature.modpow(&modulus.e, &modulus.n) == hash_message(modulus, message)
}
