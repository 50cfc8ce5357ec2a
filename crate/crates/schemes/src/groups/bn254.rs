//! BN254 pairing groups (254-bit Barreto–Naehrig curve).

use std::ops::{Add, Mul, Neg, Sub};

use ark_bn254::{Bn254, Fq, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, PrimeGroup as _};
use ark_ff::{Field, One, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::{CryptoRng, RngCore};

use super::{tagged_sha512, FieldScalar, HashToGroup, PrimeGroup};
use crate::encoding::impl_base64_serde;
use crate::error::{Result, SchemeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BnScalar(pub(crate) Fr);

/// Element of the first source group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G1(pub(crate) G1Projective);

/// Element of the second source group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G2(pub(crate) G2Projective);

/// Element of the pairing target group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gt(pub(crate) PairingOutput<Bn254>);

/// The optimal ate pairing `e: G1 × G2 → Gt`.
pub fn pairing(p: &G1, q: &G2) -> Gt {
    Gt(Bn254::pairing(p.0.into_affine(), q.0.into_affine()))
}

/// Checks `e(a1, a2) == e(b1, b2)` with a single final exponentiation.
pub fn pairing_eq(a1: &G1, a2: &G2, b1: &G1, b2: &G2) -> bool {
    let lhs = [a1.0.into_affine(), (-b1.0).into_affine()];
    let rhs = [a2.0.into_affine(), b2.0.into_affine()];
    Bn254::multi_pairing(lhs, rhs).0.is_one()
}

impl Gt {
    pub fn pow(&self, s: &BnScalar) -> Gt {
        Gt(self.0 * s.0)
    }
}

fn ser<T: CanonicalSerialize>(v: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(v.compressed_size());
    v.serialize_compressed(&mut out).expect("writing to a Vec cannot fail");
    out
}

fn de<T: CanonicalDeserialize>(bytes: &[u8], what: &str) -> Result<T> {
    T::deserialize_compressed(bytes).map_err(|e| SchemeError::Malformed(format!("{what}: {e}")))
}

impl FieldScalar for BnScalar {
    const BYTES: usize = 32;

    fn zero() -> Self {
        BnScalar(Fr::zero())
    }

    fn one() -> Self {
        BnScalar(Fr::one())
    }

    fn from_u64(v: u64) -> Self {
        BnScalar(Fr::from(v))
    }

    fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        BnScalar(Fr::rand(rng))
    }

    fn invert(&self) -> Option<Self> {
        self.0.inverse().map(BnScalar)
    }

    fn from_wide(bytes: &[u8; 64]) -> Self {
        BnScalar(Fr::from_le_bytes_mod_order(bytes))
    }

    fn to_bytes(&self) -> Vec<u8> {
        ser(&self.0)
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::BYTES {
            return Err(SchemeError::Malformed(format!("bn254 scalar of {} bytes", bytes.len())));
        }
        de(bytes, "bn254 scalar").map(BnScalar)
    }
}

impl PrimeGroup for G1 {
    type Scalar = BnScalar;

    const NAME: &'static str = "bn254-g1";
    const ENCODED_LEN: usize = 32;

    fn generator() -> Self {
        G1(G1Projective::generator())
    }

    fn identity() -> Self {
        G1(G1Projective::zero())
    }

    fn to_bytes(&self) -> Vec<u8> {
        ser(&self.0.into_affine())
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(SchemeError::Malformed(format!("bn254 G1 point of {} bytes", bytes.len())));
        }
        de::<G1Affine>(bytes, "bn254 G1 point").map(|p| G1(p.into_group()))
    }
}

impl PrimeGroup for G2 {
    type Scalar = BnScalar;

    const NAME: &'static str = "bn254-g2";
    const ENCODED_LEN: usize = 64;

    fn generator() -> Self {
        G2(G2Projective::generator())
    }

    fn identity() -> Self {
        G2(G2Projective::zero())
    }

    fn to_bytes(&self) -> Vec<u8> {
        ser(&self.0.into_affine())
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(SchemeError::Malformed(format!("bn254 G2 point of {} bytes", bytes.len())));
        }
        de::<G2Affine>(bytes, "bn254 G2 point").map(|p| G2(p.into_group()))
    }
}

impl HashToGroup for G1 {
    /// Try-and-increment on `y² = x³ + 3`. G1 has cofactor one, so every
    /// curve point is in the prime-order group.
    fn hash_to_group(domain_tag: &[u8], data: &[u8]) -> Self {
        assert!(!domain_tag.is_empty(), "hash_to_group needs a domain tag");
        let mut input = Vec::with_capacity(data.len() + 4);
        input.extend_from_slice(data);
        input.extend_from_slice(&[0u8; 4]);
        let ctr_at = data.len();
        for ctr in 0u32.. {
            input[ctr_at..].copy_from_slice(&ctr.to_be_bytes());
            let digest = tagged_sha512(domain_tag, &input);
            let x = Fq::from_le_bytes_mod_order(&digest[..48]);
            let greatest = digest[63] & 1 == 1;
            if let Some(p) = G1Affine::get_point_from_x_unchecked(x, greatest) {
                if !p.is_zero() {
                    return G1(p.into_group());
                }
            }
        }
        unreachable!("try-and-increment exhausted the counter space")
    }
}

macro_rules! impl_ops {
    ($t:ident, $s:ident) => {
        impl Add for $t {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                $t(self.0 + rhs.0)
            }
        }
        impl Sub for $t {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                $t(self.0 - rhs.0)
            }
        }
        impl Neg for $t {
            type Output = Self;
            fn neg(self) -> Self {
                $t(-self.0)
            }
        }
        impl Mul<$s> for $t {
            type Output = Self;
            fn mul(self, rhs: $s) -> Self {
                $t(self.0 * rhs.0)
            }
        }
    };
}

impl_ops!(G1, BnScalar);
impl_ops!(G2, BnScalar);

impl Add for BnScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        BnScalar(self.0 + rhs.0)
    }
}

impl Sub for BnScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        BnScalar(self.0 - rhs.0)
    }
}

impl Mul for BnScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        BnScalar(self.0 * rhs.0)
    }
}

impl Neg for BnScalar {
    type Output = Self;
    fn neg(self) -> Self {
        BnScalar(-self.0)
    }
}

impl_base64_serde!(BnScalar);
impl_base64_serde!(G1);
impl_base64_serde!(G2);
