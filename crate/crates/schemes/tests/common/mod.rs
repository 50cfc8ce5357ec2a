#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tcs_schemes::groups::{lagrange_coefficient, BnScalar, EdScalar, FieldScalar};
use tcs_schemes::{DealOptions, KeyShare, PublicKeyMaterial, SchemeId, SecretValue, ThresholdParams};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn deal(scheme: SchemeId, n: u16, t: u16, seed: u8) -> (PublicKeyMaterial, Vec<KeyShare>) {
    tcs_schemes::keys::deal_keys_seeded(scheme, ThresholdParams::new(n, t).unwrap(), &DealOptions::test(), [seed; 32])
        .unwrap()
}

pub fn subsets(n: u16, k: usize) -> Vec<Vec<u16>> {
    fn go(start: u16, n: u16, k: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// Reconstructs the dealer secret from all shares by interpolation in the
/// scalar field.
pub fn reconstruct_ed(pk: &PublicKeyMaterial, shares: &[KeyShare]) -> EdScalar {
    let subset: Vec<u16> = shares.iter().map(|s| s.index).collect();
    shares.iter().fold(EdScalar::zero(), |acc, s| {
        let SecretValue::Ed(x) = s.secret else { panic!("not an ed25519 share") };
        acc + lagrange_coefficient(&pk.params, &subset, s.index, EdScalar::zero()).unwrap() * x
    })
}

pub fn reconstruct_bn(pk: &PublicKeyMaterial, shares: &[KeyShare]) -> BnScalar {
    let subset: Vec<u16> = shares.iter().map(|s| s.index).collect();
    shares.iter().fold(BnScalar::zero(), |acc, s| {
        let SecretValue::Bn(x) = s.secret else { panic!("not a bn254 share") };
        acc + lagrange_coefficient(&pk.params, &subset, s.index, BnScalar::zero()).unwrap() * x
    })
}
