//! RSA modulus arithmetic over products of safe primes.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::encoding::biguint_b64;
use crate::error::{Result, SchemeError};

/// Supported modulus sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RsaBits {
    /// Test-size modulus; fast to generate, not secure.
    #[serde(rename = "512")]
    Test512,
    #[serde(rename = "1024")]
    B1024,
    #[serde(rename = "2048")]
    B2048,
    #[serde(rename = "4096")]
    B4096,
}

impl RsaBits {
    pub fn bits(self) -> u32 {
        match self {
            RsaBits::Test512 => 512,
            RsaBits::B1024 => 1024,
            RsaBits::B2048 => 2048,
            RsaBits::B4096 => 4096,
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            512 => Ok(RsaBits::Test512),
            1024 => Ok(RsaBits::B1024),
            2048 => Ok(RsaBits::B2048),
            4096 => Ok(RsaBits::B4096),
            other => Err(SchemeError::KeyGeneration(format!("unsupported modulus size {other}"))),
        }
    }
}

/// Public RSA parameters: `N = p·q` with safe primes and a prime exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsaModulus {
    #[serde(with = "biguint_b64")]
    pub n: BigUint,
    pub bit_length: u32,
    #[serde(with = "biguint_b64")]
    pub e: BigUint,
}

impl RsaModulus {
    /// Byte width of the modulus.
    pub fn byte_len(&self) -> usize {
        (self.bit_length as usize).div_ceil(8)
    }
}

/// Dealer-side secret factorisation.
#[derive(Clone, Debug)]
pub struct RsaSecret {
    pub modulus: RsaModulus,
    pub p: BigUint,
    pub q: BigUint,
    /// `m = p'·q'`, the order of the subgroup of squares.
    pub m: BigUint,
}

pub const PUBLIC_EXPONENT: u32 = 65537;

const SMALL_PRIMES_BOUND: u32 = 20_000;

fn small_primes() -> &'static [u32] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let bound = SMALL_PRIMES_BOUND as usize;
        let mut sieve = vec![true; bound];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < bound {
            if sieve[i] {
                let mut j = i * i;
                while j < bound {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (3..bound).filter(|&k| sieve[k]).map(|k| k as u32).collect()
    })
}

/// Miller–Rabin with `rounds` random bases.
pub fn is_probable_prime<R: RngCore + CryptoRng>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u8);
    if *n < two {
        return false;
    }
    for &p in small_primes().iter().take(64) {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    if n.is_even() {
        return *n == two;
    }
    let n_minus_one = n - 1u8;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Generates a safe prime `p = 2p' + 1` of exactly `bits` bits whose top two
/// bits are set, so that a product of two such primes has `2·bits` bits.
pub fn generate_safe_prime<R: RngCore + CryptoRng>(bits: u32, rng: &mut R) -> BigUint {
    assert!(bits >= 16, "safe primes below 16 bits are not supported");
    let primes = small_primes();
    let sub_bits = bits - 1;
    loop {
        // Sieve a window of odd candidates p' starting at a random point.
        let mut start = rng.gen_biguint(sub_bits as u64);
        start |= BigUint::from(3u8) << (sub_bits - 2);
        start |= BigUint::one();
        let residues: Vec<u32> = primes
            .iter()
            .map(|&p| (&start % p).to_u32_digits().first().copied().unwrap_or(0))
            .collect();
        for step in 0..(4 * bits * bits) {
            let off = 2 * step;
            let survives = primes.iter().zip(&residues).all(|(&p, &r)| {
                let rp = ((r as u64 + off as u64) % p as u64) as u32;
                // p' ≠ 0 and 2p'+1 ≠ 0 modulo every small prime
                rp != 0 && (2 * rp as u64 + 1) % p as u64 != 0
            });
            if !survives {
                continue;
            }
            let sub = &start + off;
            if sub.bits() != sub_bits as u64 {
                break;
            }
            if !is_probable_prime(&sub, 1, rng) {
                continue;
            }
            let p = (&sub << 1u8) + 1u8;
            // A base-2 Fermat test on p together with p' prime suffices
            // (Pocklington); MR rounds on p' add confidence.
            if BigUint::from(2u8).modpow(&(&p - 1u8), &p).is_one() && is_probable_prime(&sub, 24, rng) {
                return p;
            }
        }
    }
}

/// Generates a modulus from two distinct safe primes and the fixed public
/// exponent.
pub fn generate_modulus<R: RngCore + CryptoRng>(bits: RsaBits, rng: &mut R) -> RsaSecret {
    let half = bits.bits() / 2;
    let e = BigUint::from(PUBLIC_EXPONENT);
    loop {
        let p = generate_safe_prime(half, rng);
        let q = generate_safe_prime(half, rng);
        if p == q {
            continue;
        }
        let n = &p * &q;
        debug_assert_eq!(n.bits(), bits.bits() as u64);
        let m = (&p >> 1u8) * (&q >> 1u8);
        // m is a product of two large primes, so e = 65537 is coprime to it
        // unless e divides p' or q', which cannot happen for large safe primes.
        if !m.gcd(&e).is_one() {
            continue;
        }
        return RsaSecret {
            modulus: RsaModulus {
                n,
                bit_length: bits.bits(),
                e,
            },
            p,
            q,
            m,
        };
    }
}

pub fn factorial(n: u16) -> BigUint {
    (1..=n as u32).fold(BigUint::one(), |acc, k| acc * k)
}

/// `Δ·λ_{0,i}` over the integers: `Δ · Π_{j≠i} (0 - j) / (i - j)`.
/// Exact because `Δ = n!` clears every denominator.
pub fn scaled_lagrange(delta: &BigUint, subset: &[u16], i: u16) -> BigInt {
    let mut num = BigInt::from_biguint(Sign::Plus, delta.clone());
    let mut den = BigInt::one();
    for &j in subset.iter().filter(|&&j| j != i) {
        num *= -(j as i64);
        den *= i as i64 - j as i64;
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// `base^exp mod n` for a signed exponent.
pub fn mod_pow_signed(base: &BigUint, exp: &BigInt, n: &BigUint) -> Result<BigUint> {
    let r = base.modpow(exp.magnitude(), n);
    if exp.is_negative() {
        mod_inverse(&r, n)
    } else {
        Ok(r)
    }
}

pub fn mod_inverse(a: &BigUint, n: &BigUint) -> Result<BigUint> {
    a.modinv(n)
        .ok_or_else(|| SchemeError::Malformed("element is not invertible modulo N".into()))
}

/// Bézout coefficients `(a, b)` with `a·x + b·y = gcd(x, y)`.
pub fn bezout(x: &BigUint, y: &BigUint) -> (BigInt, BigInt, BigUint) {
    let xi = BigInt::from_biguint(Sign::Plus, x.clone());
    let yi = BigInt::from_biguint(Sign::Plus, y.clone());
    let eg = xi.extended_gcd(&yi);
    (eg.x, eg.y, eg.gcd.magnitude().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn miller_rabin_small_values() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let primes = [2u32, 3, 5, 7, 101, 7919, 104_729];
        let composites = [1u32, 4, 9, 561, 1105, 7917, 104_730];
        for p in primes {
            assert!(is_probable_prime(&BigUint::from(p), 16, &mut rng), "{p}");
        }
        for c in composites {
            assert!(!is_probable_prime(&BigUint::from(c), 16, &mut rng), "{c}");
        }
        // 2^127 - 1 is prime
        let m127 = (BigUint::one() << 127u32) - 1u8;
        assert!(is_probable_prime(&m127, 16, &mut rng));
    }

    #[test]
    fn safe_prime_shape() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let p = generate_safe_prime(128, &mut rng);
        assert_eq!(p.bits(), 128);
        assert!(is_probable_prime(&p, 32, &mut rng));
        assert!(is_probable_prime(&(&p >> 1u8), 32, &mut rng));
    }

    #[test]
    fn test_modulus_has_declared_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sk = generate_modulus(RsaBits::Test512, &mut rng);
        assert_eq!(sk.modulus.n.bits(), 512);
        assert_eq!(sk.modulus.bit_length, 512);
        assert_eq!(&sk.p * &sk.q, sk.modulus.n);
        assert!(is_probable_prime(&sk.modulus.e, 16, &mut rng));
    }

    #[test]
    fn scaled_lagrange_interpolates_over_integers() {
        // f(x) = 5 + 3x + 2x², n = 7; Δ·f(0) = Σ Δλ_i f(i)
        let f = |x: i64| 5 + 3 * x + 2 * x * x;
        let delta = factorial(7);
        for subset in [[1u16, 2, 3], [2, 5, 7], [4, 6, 7]] {
            let acc: BigInt = subset
                .iter()
                .map(|&i| scaled_lagrange(&delta, &subset, i) * f(i as i64))
                .sum();
            assert_eq!(acc, BigInt::from(5) * BigInt::from_biguint(Sign::Plus, delta.clone()));
        }
    }

    #[test]
    fn bezout_identity() {
        let x = BigUint::from(4u32 * 36 * 36);
        let y = BigUint::from(PUBLIC_EXPONENT);
        let (a, b, g) = bezout(&x, &y);
        assert!(g.is_one());
        let lhs = a * BigInt::from_biguint(Sign::Plus, x) + b * BigInt::from_biguint(Sign::Plus, y);
        assert!(lhs.is_one());
    }
}
