//! Single-bit mutations of shares, proofs, ciphertexts and requests are
//! rejected by the matching verifier.

mod common;

use std::sync::OnceLock;

use common::{deal, rng};
use num_bigint::BigUint;
use proptest::prelude::*;
use tcs_schemes::groups::{BnScalar, EdPoint, EdScalar, FieldScalar, PrimeGroup, G1, G2};
use tcs_schemes::kg20::SigningPackage;
use tcs_schemes::request::Encapsulation;
use tcs_schemes::{
    api, Ciphertext, KeyShare, PartialResult, PublicKeyMaterial, Request, RequestBinding, SchemeId, ShareValue,
};

struct Fixture {
    pk: PublicKeyMaterial,
    keys: Vec<KeyShare>,
    request: Request,
    binding: RequestBinding,
    share: Option<PartialResult>,
}

fn fixture(scheme: SchemeId) -> &'static Fixture {
    static CELLS: [OnceLock<Fixture>; 6] = [const { OnceLock::new() }; 6];
    let slot = SchemeId::ALL.iter().position(|s| *s == scheme).unwrap();
    CELLS[slot].get_or_init(|| {
        let (pk, keys) = deal(scheme, 4, 1, 90 + slot as u8);
        let mut r = rng(slot as u64);
        let request = match scheme.kind() {
            tcs_schemes::SchemeKind::Cipher => {
                Request::Decrypt(api::encrypt(&pk, b"label", b"secret payload", &mut r).unwrap())
            }
            tcs_schemes::SchemeKind::Signature => Request::Sign(b"message to sign".to_vec()),
            tcs_schemes::SchemeKind::Randomness => Request::Coin(b"coin name".to_vec()),
        };
        let binding = RequestBinding::compute(&pk, &request).unwrap();
        // KG20 has no single-round share; its test builds a signing package.
        let share = api::create_share(&keys[1], &request, &mut r).ok();
        Fixture {
            pk,
            keys,
            request,
            binding,
            share,
        }
    })
}

fn flip(bytes: &[u8], bit: usize) -> Vec<u8> {
    let mut out = bytes.to_vec();
    let bit = bit % (out.len() * 8);
    out[bit / 8] ^= 1 << (bit % 8);
    out
}

fn flip_big(v: &BigUint, bit: usize) -> BigUint {
    let bits = v.bits().max(1);
    v ^ (BigUint::from(1u8) << (bit as u64 % bits))
}

/// A mutated share is rejected if it no longer decodes or fails
/// verification.
fn share_rejected(f: &Fixture, value: Option<ShareValue>) -> bool {
    let Some(value) = value else { return true };
    let p = PartialResult {
        value,
        ..f.share.clone().unwrap()
    };
    !matches!(api::verify_share(&f.pk, &f.binding, &f.request, &p), Ok(true))
}

fn ed_point(bytes: &[u8], bit: usize) -> Option<EdPoint> {
    EdPoint::from_bytes(&flip(bytes, bit)).ok()
}

fn ed_scalar(s: &EdScalar, bit: usize) -> Option<EdScalar> {
    EdScalar::from_bytes(&flip(&s.to_bytes(), bit)).ok()
}

fn mutate_share(value: &ShareValue, class: u8, bit: usize) -> Option<ShareValue> {
    match value {
        ShareValue::Sg02 { u_i, proof } => match class % 3 {
            0 => ed_point(&u_i.to_bytes(), bit).map(|u_i| ShareValue::Sg02 { u_i, proof: *proof }),
            1 => ed_scalar(&proof.challenge, bit).map(|c| {
                let mut p = *proof;
                p.challenge = c;
                ShareValue::Sg02 { u_i: *u_i, proof: p }
            }),
            _ => ed_scalar(&proof.response, bit).map(|z| {
                let mut p = *proof;
                p.response = z;
                ShareValue::Sg02 { u_i: *u_i, proof: p }
            }),
        },
        ShareValue::Cks05 { g_i, proof } => match class % 3 {
            0 => ed_point(&g_i.to_bytes(), bit).map(|g_i| ShareValue::Cks05 { g_i, proof: *proof }),
            1 => ed_scalar(&proof.challenge, bit).map(|c| {
                let mut p = *proof;
                p.challenge = c;
                ShareValue::Cks05 { g_i: *g_i, proof: p }
            }),
            _ => ed_scalar(&proof.response, bit).map(|z| {
                let mut p = *proof;
                p.response = z;
                ShareValue::Cks05 { g_i: *g_i, proof: p }
            }),
        },
        ShareValue::Bz03 { u_i } => G2::from_bytes(&flip(&u_i.to_bytes(), bit)).ok().map(|u_i| ShareValue::Bz03 { u_i }),
        ShareValue::Bls04 { sigma_i } => G1::from_bytes(&flip(&sigma_i.to_bytes(), bit))
            .ok()
            .map(|sigma_i| ShareValue::Bls04 { sigma_i }),
        ShareValue::Sh00 { x_i, proof } => {
            let mut proof = proof.clone();
            let mut x_i = x_i.clone();
            match class % 3 {
                0 => x_i = flip_big(&x_i, bit),
                1 => proof.c = flip_big(&proof.c, bit),
                _ => proof.z = flip_big(&proof.z, bit),
            }
            Some(ShareValue::Sh00 { x_i, proof })
        }
        ShareValue::Kg20 { z_i } => ed_scalar(z_i, bit).map(|z_i| ShareValue::Kg20 { z_i }),
    }
}

/// Same share checked against a request differing in one bit.
fn binding_rejected(f: &Fixture, bit: usize) -> bool {
    let other = match &f.request {
        Request::Decrypt(c) => Request::Decrypt(Ciphertext {
            label: flip(&c.label, bit),
            ..c.clone()
        }),
        Request::Sign(m) => Request::Sign(flip(m, bit)),
        Request::Coin(n) => Request::Coin(flip(n, bit)),
    };
    let b = RequestBinding::compute(&f.pk, &other).unwrap();
    let rebound = PartialResult {
        binding: b,
        ..f.share.clone().unwrap()
    };
    !matches!(api::verify_share(&f.pk, &b, &other, &rebound), Ok(true))
}

fn ciphertext_rejected(f: &Fixture, part: u8, bit: usize) -> bool {
    let Request::Decrypt(c) = &f.request else { unreachable!() };
    let enc = match &c.encapsulation {
        Encapsulation::Sg02 { u, u_bar, e, f } => match part % 4 {
            0 => ed_point(&u.to_bytes(), bit).map(|u| Encapsulation::Sg02 { u, u_bar: *u_bar, e: *e, f: *f }),
            1 => ed_point(&u_bar.to_bytes(), bit).map(|u_bar| Encapsulation::Sg02 { u: *u, u_bar, e: *e, f: *f }),
            2 => ed_scalar(e, bit).map(|e| Encapsulation::Sg02 { u: *u, u_bar: *u_bar, e, f: *f }),
            _ => ed_scalar(f, bit).map(|f| Encapsulation::Sg02 { u: *u, u_bar: *u_bar, e: *e, f }),
        },
        Encapsulation::Bz03 { u, v } => match part % 2 {
            0 => G2::from_bytes(&flip(&u.to_bytes(), bit)).ok().map(|u| Encapsulation::Bz03 { u, v: *v }),
            _ => G1::from_bytes(&flip(&v.to_bytes(), bit)).ok().map(|v| Encapsulation::Bz03 { u: *u, v }),
        },
    };
    let Some(enc) = enc else { return true };
    let bad = Ciphertext {
        encapsulation: enc,
        ..c.clone()
    };
    !matches!(api::verify_ciphertext(&f.pk, &bad), Ok(true))
}

fn honest_still_verifies(f: &Fixture) {
    assert!(api::verify_share(&f.pk, &f.binding, &f.request, f.share.as_ref().unwrap()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sg02_tamper(class in 0u8..3, part in 0u8..4, bit in 0usize..256) {
        let f = fixture(SchemeId::Sg02);
        honest_still_verifies(f);
        prop_assert!(share_rejected(f, mutate_share(&f.share.as_ref().unwrap().value, class, bit)));
        prop_assert!(ciphertext_rejected(f, part, bit));
        prop_assert!(binding_rejected(f, bit));
    }

    #[test]
    fn bz03_tamper(part in 0u8..2, bit in 0usize..512) {
        let f = fixture(SchemeId::Bz03);
        prop_assert!(share_rejected(f, mutate_share(&f.share.as_ref().unwrap().value, 0, bit)));
        prop_assert!(ciphertext_rejected(f, part, bit));
    }

    #[test]
    fn sh00_tamper(class in 0u8..3, bit in 0usize..1024) {
        let f = fixture(SchemeId::Sh00);
        prop_assert!(share_rejected(f, mutate_share(&f.share.as_ref().unwrap().value, class, bit)));
        prop_assert!(binding_rejected(f, bit));
    }

    #[test]
    fn bls04_tamper(bit in 0usize..256) {
        let f = fixture(SchemeId::Bls04);
        prop_assert!(share_rejected(f, mutate_share(&f.share.as_ref().unwrap().value, 0, bit)));
        prop_assert!(binding_rejected(f, bit));
    }

    #[test]
    fn cks05_tamper(class in 0u8..3, bit in 0usize..256) {
        let f = fixture(SchemeId::Cks05);
        honest_still_verifies(f);
        prop_assert!(share_rejected(f, mutate_share(&f.share.as_ref().unwrap().value, class, bit)));
        prop_assert!(binding_rejected(f, bit));
    }

    #[test]
    fn kg20_tamper(bit in 0usize..256, seed in any::<u64>()) {
        let f = fixture(SchemeId::Kg20);
        let Request::Sign(m) = &f.request else { unreachable!() };
        let mut r = rng(seed);
        let mut n1 = api::frost_round1(&f.keys[0], &mut r).unwrap();
        let mut n2 = api::frost_round1(&f.keys[1], &mut r).unwrap();
        let commitments = [(1, *n1.commitment()), (2, *n2.commitment())].into_iter().collect();
        let package = SigningPackage::new(&f.pk.params, m, &[1, 2], &commitments).unwrap();
        let p1 = api::frost_round2(&f.keys[0], &package, &mut n1).unwrap();
        let p2 = api::frost_round2(&f.keys[1], &package, &mut n2).unwrap();
        prop_assert!(api::verify_frost_share(&f.pk, &f.binding, &package, &p2).unwrap());
        let rejected = match mutate_share(&p2.value, 0, bit) {
            None => true,
            Some(value) => {
                let bad = PartialResult { value, ..p2.clone() };
                let out = api::combine_frost(&f.pk, &f.binding, &package, &[p1.clone(), bad.clone()]).unwrap();
                !api::verify_frost_share(&f.pk, &f.binding, &package, &bad).unwrap()
                    && !api::verify_result(&f.pk, &f.request, &out)
            }
        };
        prop_assert!(rejected);
        // Message binding: the package for another message rejects the response.
        let other = SigningPackage::new(&f.pk.params, &flip(m, bit), &[1, 2], &commitments).unwrap();
        prop_assert!(!api::verify_frost_share(&f.pk, &f.binding, &other, &p2).unwrap());
    }
}

#[test]
fn mutation_helpers_change_values() {
    let s = BnScalar::from_u64(5);
    assert_ne!(flip(&s.to_bytes(), 3), s.to_bytes());
    assert_ne!(flip_big(&BigUint::from(8u8), 1), BigUint::from(8u8));
}
