//! Arithmetic substrate shared by all schemes.
//!
//! Two elliptic-curve families are supported: the prime-order subgroup of
//! the Edwards form of Curve25519 and the BN254 pairing groups. RSA modulus
//! arithmetic lives in [`rsa`].

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};

use crate::error::{Result, SchemeError};
use crate::params::ThresholdParams;

pub mod bn254;
pub mod ed25519;
pub mod rsa;

pub use bn254::{pairing, BnScalar, Gt, G1, G2};
pub use ed25519::{EdPoint, EdScalar};

/// Element of a prime field `Z_q` used as exponent space of a group.
pub trait FieldScalar:
    Copy
    + Clone
    + Debug
    + PartialEq
    + Eq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Canonical little-endian width in bytes.
    const BYTES: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self;
    fn invert(&self) -> Option<Self>;
    /// Reduces 64 uniformly random bytes modulo the group order.
    fn from_wide(bytes: &[u8; 64]) -> Self;
    fn to_bytes(&self) -> Vec<u8>;
    fn from_bytes(bytes: &[u8]) -> Result<Self>;
}

/// A prime-order group written additively.
pub trait PrimeGroup:
    Copy
    + Clone
    + Debug
    + PartialEq
    + Eq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<<Self as PrimeGroup>::Scalar, Output = Self>
{
    type Scalar: FieldScalar;

    const NAME: &'static str;
    /// Length of the compressed encoding.
    const ENCODED_LEN: usize;

    fn generator() -> Self;
    fn identity() -> Self;
    fn to_bytes(&self) -> Vec<u8>;
    /// Decodes and checks prime-order subgroup membership.
    fn from_bytes(bytes: &[u8]) -> Result<Self>;
}

/// Groups with a deterministic map from byte strings into the group.
pub trait HashToGroup: PrimeGroup {
    fn hash_to_group(domain_tag: &[u8], data: &[u8]) -> Self;
}

/// Length-prefixed hash input; keeps multi-part transcripts unambiguous.
#[derive(Clone, Default)]
pub struct Transcript {
    buf: Vec<u8>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, part: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(&(part.len() as u64).to_be_bytes());
        self.buf.extend_from_slice(part);
        self
    }

    pub fn append_point<G: PrimeGroup>(&mut self, p: &G) -> &mut Self {
        self.append(&p.to_bytes())
    }

    pub fn append_u16(&mut self, v: u16) -> &mut Self {
        self.append(&v.to_be_bytes())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }
}

pub(crate) fn tagged_sha512(domain_tag: &[u8], data: &[u8]) -> [u8; 64] {
    let mut h = Sha512::new();
    h.update((domain_tag.len() as u64).to_be_bytes());
    h.update(domain_tag);
    h.update(data);
    h.finalize().into()
}

/// Wide reduction of a domain-separated SHA-512 digest.
pub fn hash_to_scalar<S: FieldScalar>(domain_tag: &[u8], data: &[u8]) -> S {
    assert!(!domain_tag.is_empty(), "hash_to_scalar needs a domain tag");
    S::from_wide(&tagged_sha512(domain_tag, data))
}

/// Lagrange coefficient of party `i` for interpolating at `eval_at` from
/// the points in `subset`. Evaluation points are the party indices.
pub fn lagrange_coefficient<S: FieldScalar>(
    params: &ThresholdParams,
    subset: &[u16],
    i: u16,
    eval_at: S,
) -> Result<S> {
    check_subset(params, subset)?;
    if !subset.contains(&i) {
        return Err(SchemeError::NotInSubset(i));
    }
    let xi = S::from_u64(i as u64);
    let mut num = S::one();
    let mut den = S::one();
    for &j in subset.iter().filter(|&&j| j != i) {
        let xj = S::from_u64(j as u64);
        num = num * (eval_at - xj);
        den = den * (xi - xj);
    }
    // den != 0 because indices are distinct and smaller than the group order
    Ok(num * den.invert().expect("distinct indices"))
}

pub(crate) fn check_subset(params: &ThresholdParams, subset: &[u16]) -> Result<()> {
    if subset.len() < params.quorum() {
        return Err(SchemeError::TooFewPoints {
            needed: params.quorum(),
            got: subset.len(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for &j in subset {
        params.check_index(j)?;
        if !seen.insert(j) {
            return Err(SchemeError::DuplicateIndex(j));
        }
    }
    Ok(())
}

/// Evaluates `coeffs[0] + coeffs[1]·x + ...` at `x`.
pub fn eval_polynomial<S: FieldScalar>(coeffs: &[S], x: S) -> S {
    coeffs.iter().rev().fold(S::zero(), |acc, c| acc * x + *c)
}

/// Shamir-shares `secret` with a random degree-`t` polynomial; entry `k`
/// is the share of party `k + 1`.
pub fn shamir_share<S: FieldScalar, R: RngCore + CryptoRng>(
    secret: S,
    params: &ThresholdParams,
    rng: &mut R,
) -> Vec<S> {
    let mut coeffs = Vec::with_capacity(params.quorum());
    coeffs.push(secret);
    coeffs.extend((0..params.t).map(|_| S::random(rng)));
    params
        .indices()
        .map(|i| eval_polynomial(&coeffs, S::from_u64(i as u64)))
        .collect()
}

/// `Σ λ_i · P_i` over the given `(index, point)` pairs, interpolating at 0.
pub fn interpolate_in_exponent<G: PrimeGroup>(
    params: &ThresholdParams,
    points: &[(u16, G)],
) -> Result<G> {
    let subset: Vec<u16> = points.iter().map(|(i, _)| *i).collect();
    let mut acc = G::identity();
    for (i, p) in points {
        let l = lagrange_coefficient(params, &subset, *i, G::Scalar::zero())?;
        acc = acc + *p * l;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn all_subsets(n: u16, k: usize) -> Vec<Vec<u16>> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                out.push((1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect());
            }
        }
        out
    }

    #[test]
    fn single_point_coefficient_is_one() {
        let p = ThresholdParams::new(1, 0).unwrap();
        let l: EdScalar = lagrange_coefficient(&p, &[1], 1, EdScalar::zero()).unwrap();
        assert_eq!(l, EdScalar::one());
    }

    #[test]
    fn two_point_coefficient() {
        let p = ThresholdParams::new(4, 1).unwrap();
        let l: EdScalar = lagrange_coefficient(&p, &[1, 2], 1, EdScalar::zero()).unwrap();
        assert_eq!(l, EdScalar::from_u64(2));
        let l2: EdScalar = lagrange_coefficient(&p, &[1, 2], 2, EdScalar::zero()).unwrap();
        assert_eq!(l2, -EdScalar::one());

        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = EdScalar::random(&mut rng);
        let b = EdScalar::random(&mut rng);
        let f = |x: u64| a + b * EdScalar::from_u64(x);
        assert_eq!(l * f(1) + l2 * f(2), a);
    }

    #[test]
    fn lagrange_rejects_bad_sets() {
        let p = ThresholdParams::new(4, 1).unwrap();
        assert_eq!(
            lagrange_coefficient::<EdScalar>(&p, &[1, 1], 1, EdScalar::zero()),
            Err(SchemeError::DuplicateIndex(1))
        );
        assert_eq!(
            lagrange_coefficient::<EdScalar>(&p, &[2, 3], 1, EdScalar::zero()),
            Err(SchemeError::NotInSubset(1))
        );
        assert!(lagrange_coefficient::<EdScalar>(&p, &[2], 2, EdScalar::zero()).is_err());
        assert!(lagrange_coefficient::<EdScalar>(&p, &[2, 5], 2, EdScalar::zero()).is_err());
    }

    fn interpolation_holds<S: FieldScalar>() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for n in 1..=10u16 {
            for t in 0..n.min(6) {
                let params = ThresholdParams::new(n, t).unwrap();
                let coeffs: Vec<S> = (0..=t).map(|_| S::random(&mut rng)).collect();
                let shares: Vec<S> = (1..=n)
                    .map(|i| eval_polynomial(&coeffs, S::from_u64(i as u64)))
                    .collect();
                for subset in all_subsets(n, t as usize + 1) {
                    let mut acc = S::zero();
                    for &i in &subset {
                        let l = lagrange_coefficient(&params, &subset, i, S::zero()).unwrap();
                        acc = acc + l * shares[i as usize - 1];
                    }
                    assert_eq!(acc, coeffs[0], "n={n} t={t} subset={subset:?}");
                }
            }
        }
    }

    #[test]
    fn interpolation_recovers_constant_term() {
        interpolation_holds::<EdScalar>();
        interpolation_holds::<BnScalar>();
    }

    #[test]
    fn interpolation_at_nonzero_point() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let params = ThresholdParams::new(7, 2).unwrap();
        let coeffs: Vec<EdScalar> = (0..3).map(|_| EdScalar::random(&mut rng)).collect();
        let subset = [2u16, 5, 7];
        let at = EdScalar::from_u64(11);
        let mut acc = EdScalar::zero();
        for &i in &subset {
            let y = eval_polynomial(&coeffs, EdScalar::from_u64(i as u64));
            acc = acc + lagrange_coefficient(&params, &subset, i, at).unwrap() * y;
        }
        assert_eq!(acc, eval_polynomial(&coeffs, at));
    }

    #[test]
    fn hash_to_scalar_separates_domains() {
        let a: EdScalar = hash_to_scalar(b"tag-a", b"m");
        let b: EdScalar = hash_to_scalar(b"tag-a", b"m");
        let c: EdScalar = hash_to_scalar(b"tag-b", b"m");
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn transcript_is_unambiguous() {
        let mut a = Transcript::new();
        a.append(b"ab").append(b"c");
        let mut b = Transcript::new();
        b.append(b"a").append(b"bc");
        assert_ne!(a.as_bytes(), b.as_bytes());
    }
}
