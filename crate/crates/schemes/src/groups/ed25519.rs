//! Prime-order subgroup of the twisted Edwards curve behind Ed25519.

use std::ops::{Add, Mul, Neg, Sub};

use curve25519_dalek::constants::ED25519_BASEPOINT_POINT;
use curve25519_dalek::edwards::{CompressedEdwardsY, EdwardsPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::{CryptoRng, RngCore};

use super::{tagged_sha512, FieldScalar, HashToGroup, PrimeGroup};
use crate::encoding::impl_base64_serde;
use crate::error::{Result, SchemeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdScalar(pub(crate) Scalar);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdPoint(pub(crate) EdwardsPoint);

impl EdScalar {
    pub fn inner(&self) -> &Scalar {
        &self.0
    }
}

impl EdPoint {
    pub fn inner(&self) -> &EdwardsPoint {
        &self.0
    }

    pub fn compress(&self) -> [u8; 32] {
        self.0.compress().to_bytes()
    }
}

impl FieldScalar for EdScalar {
    const BYTES: usize = 32;

    fn zero() -> Self {
        EdScalar(Scalar::ZERO)
    }

    fn one() -> Self {
        EdScalar(Scalar::ONE)
    }

    fn from_u64(v: u64) -> Self {
        EdScalar(Scalar::from(v))
    }

    fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        EdScalar(Scalar::from_bytes_mod_order_wide(&wide))
    }

    fn invert(&self) -> Option<Self> {
        if self.0 == Scalar::ZERO {
            None
        } else {
            Some(EdScalar(self.0.invert()))
        }
    }

    fn from_wide(bytes: &[u8; 64]) -> Self {
        EdScalar(Scalar::from_bytes_mod_order_wide(bytes))
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.0.to_bytes().to_vec()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| SchemeError::Malformed(format!("ed25519 scalar of {} bytes", bytes.len())))?;
        Option::from(Scalar::from_canonical_bytes(arr))
            .map(EdScalar)
            .ok_or_else(|| SchemeError::Malformed("non-canonical ed25519 scalar".into()))
    }
}

impl PrimeGroup for EdPoint {
    type Scalar = EdScalar;

    const NAME: &'static str = "ed25519";
    const ENCODED_LEN: usize = 32;

    fn generator() -> Self {
        EdPoint(ED25519_BASEPOINT_POINT)
    }

    fn identity() -> Self {
        EdPoint(EdwardsPoint::identity())
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.compress().to_vec()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| SchemeError::Malformed(format!("ed25519 point of {} bytes", bytes.len())))?;
        let p = CompressedEdwardsY(arr)
            .decompress()
            .ok_or_else(|| SchemeError::Malformed("not an ed25519 point".into()))?;
        if !p.is_torsion_free() {
            return Err(SchemeError::Malformed("ed25519 point outside prime-order subgroup".into()));
        }
        Ok(EdPoint(p))
    }
}

impl HashToGroup for EdPoint {
    /// Try-and-increment: interpret a counter-indexed digest as a compressed
    /// point and clear the cofactor.
    fn hash_to_group(domain_tag: &[u8], data: &[u8]) -> Self {
        assert!(!domain_tag.is_empty(), "hash_to_group needs a domain tag");
        let mut input = Vec::with_capacity(data.len() + 4);
        input.extend_from_slice(data);
        input.extend_from_slice(&[0u8; 4]);
        let ctr_at = data.len();
        for ctr in 0u32.. {
            input[ctr_at..].copy_from_slice(&ctr.to_be_bytes());
            let digest = tagged_sha512(domain_tag, &input);
            let mut y = [0u8; 32];
            y.copy_from_slice(&digest[..32]);
            if let Some(p) = CompressedEdwardsY(y).decompress() {
                let p = p.mul_by_cofactor();
                if p != EdwardsPoint::identity() {
                    return EdPoint(p);
                }
            }
        }
        unreachable!("try-and-increment exhausted the counter space")
    }
}

impl Add for EdScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        EdScalar(self.0 + rhs.0)
    }
}

impl Sub for EdScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        EdScalar(self.0 - rhs.0)
    }
}

impl Mul for EdScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        EdScalar(self.0 * rhs.0)
    }
}

impl Neg for EdScalar {
    type Output = Self;
    fn neg(self) -> Self {
        EdScalar(-self.0)
    }
}

impl Add for EdPoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        EdPoint(self.0 + rhs.0)
    }
}

impl Sub for EdPoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        EdPoint(self.0 - rhs.0)
    }
}

impl Neg for EdPoint {
    type Output = Self;
    fn neg(self) -> Self {
        EdPoint(-self.0)
    }
}

impl Mul<EdScalar> for EdPoint {
    type Output = Self;
    fn mul(self, rhs: EdScalar) -> Self {
        EdPoint(self.0 * rhs.0)
    }
}

impl_base64_serde!(EdScalar);
impl_base64_serde!(EdPoint);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::hash_to_scalar;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn wide_reduction_matches_bigint() {
        // l = 2^252 + 27742317777372353535851937790883648493
        let l = (BigUint::from(1u8) << 252u32)
            + "27742317777372353535851937790883648493".parse::<BigUint>().unwrap();
        for i in 0..50u32 {
            let data = i.to_be_bytes();
            let s: EdScalar = hash_to_scalar(b"test/h2s", &data);
            let digest = tagged_sha512(b"test/h2s", &data);
            let expected = BigUint::from_bytes_le(&digest) % &l;
            let got = BigUint::from_bytes_le(&s.to_bytes());
            assert_eq!(got, expected);
            assert!(got < l);
        }
    }

    #[test]
    fn hash_to_group_is_deterministic_and_in_subgroup() {
        let a = EdPoint::hash_to_group(b"test/h2g", b"coin-1");
        let b = EdPoint::hash_to_group(b"test/h2g", b"coin-1");
        let c = EdPoint::hash_to_group(b"test/h2g", b"coin-2");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.0.is_torsion_free());
        assert_eq!(EdPoint::from_bytes(&a.to_bytes()).unwrap(), a);
    }

    #[test]
    fn rejects_small_order_points() {
        // Encoding of a point of order 2: (0, -1).
        let mut neg_one = [0xffu8; 32];
        neg_one[0] = 0xec;
        neg_one[31] = 0x7f;
        assert!(EdPoint::from_bytes(&neg_one).is_err());
        assert!(EdPoint::from_bytes(&[1u8; 31]).is_err());
    }

    #[test]
    fn group_law() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let g = EdPoint::generator();
        for _ in 0..1000 {
            let a = EdScalar::random(&mut rng);
            let b = EdScalar::random(&mut rng);
            assert_eq!(g * (a + b), g * a + g * b);
        }
        let p = g * EdScalar::random(&mut rng);
        assert_eq!(p + (-p), EdPoint::identity());
    }

    #[test]
    fn scalar_encoding_is_canonical() {
        assert!(EdScalar::from_bytes(&[0xff; 32]).is_err());
        let s = EdScalar::from_u64(12345);
        assert_eq!(EdScalar::from_bytes(&s.to_bytes()).unwrap(), s);
    }
}
