mod common;

use std::collections::BTreeMap;

use common::{deal, reconstruct_bn, rng, subsets};
use num_bigint::BigUint;
use tcs_schemes::groups::{pairing, PrimeGroup, G2};
use tcs_schemes::keys::PublicKey;
use tcs_schemes::kg20::{self, SigningPackage};
use tcs_schemes::{
    api, bls04, sh00, PartialResult, Request, RequestBinding, SchemeError, SchemeId, ShareValue, Signature,
    ThresholdOutput,
};

fn sign_all(keys: &[tcs_schemes::KeyShare], m: &[u8]) -> Vec<PartialResult> {
    let mut r = rng(99);
    keys.iter().map(|k| api::sign_share(k, m, &mut r).unwrap()).collect()
}

#[test]
fn bls_subsets_agree_and_verify_textbook() {
    let (pk, keys) = deal(SchemeId::Bls04, 7, 2, 40);
    let m = b"bls message".to_vec();
    let req = Request::Sign(m.clone());
    let binding = RequestBinding::compute(&pk, &req).unwrap();
    let parts = sign_all(&keys, &m);
    let PublicKey::Bls04(k) = &pk.key else { unreachable!() };
    for p in &parts {
        assert!(api::verify_share(&pk, &binding, &req, p).unwrap());
        // e(σ_i, P₂) = e(H(m), vk_i), computed directly.
        let ShareValue::Bls04 { sigma_i } = p.value else { unreachable!() };
        assert_eq!(
            pairing(&sigma_i, &G2::generator()),
            pairing(&bls04::hash_message(&m), &k.verification_keys[p.index as usize - 1])
        );
    }
    let mut first = None;
    for s in subsets(7, 3) {
        let chosen: Vec<_> = s.iter().map(|i| parts[*i as usize - 1].clone()).collect();
        let out = api::combine(&pk, &binding, &req, &chosen).unwrap();
        assert!(api::verify_result(&pk, &req, &out));
        let ThresholdOutput::Signature(Signature::Bls04(sigma)) = &out else { unreachable!() };
        assert_eq!(pairing(sigma, &G2::generator()), pairing(&bls04::hash_message(&m), &k.pk));
        match &first {
            None => first = Some(out.to_bytes()),
            Some(f) => assert_eq!(f, &out.to_bytes()),
        }
    }
    let out = api::combine(&pk, &binding, &req, &parts[..3]).unwrap();
    assert!(!api::verify_result(&pk, &Request::Sign(b"other".to_vec()), &out));
}

#[test]
fn bls_any_pair_reconstructs_the_dealt_secret() {
    let (pk, keys) = deal(SchemeId::Bls04, 4, 1, 41);
    let PublicKey::Bls04(k) = &pk.key else { unreachable!() };
    for s in subsets(4, 2) {
        let chosen: Vec<_> = s.iter().map(|i| keys[*i as usize - 1].clone()).collect();
        assert_eq!(G2::generator() * reconstruct_bn(&pk, &chosen), k.pk);
    }
}

#[test]
fn single_party_share_is_the_secret() {
    let (pk, keys) = deal(SchemeId::Bls04, 1, 0, 42);
    let PublicKey::Bls04(k) = &pk.key else { unreachable!() };
    assert_eq!(keys.len(), 1);
    assert_eq!(k.verification_keys[0], k.pk);
}

#[test]
fn rsa_subsets_agree_and_verify_textbook() {
    let (pk, keys) = deal(SchemeId::Sh00, 7, 2, 43);
    let PublicKey::Sh00(k) = &pk.key else { unreachable!() };
    assert_eq!(k.modulus.n.bits(), 512);
    assert_eq!(k.modulus.bit_length, 512);
    let m = b"rsa message".to_vec();
    let req = Request::Sign(m.clone());
    let binding = RequestBinding::compute(&pk, &req).unwrap();
    let parts = sign_all(&keys, &m);
    for p in &parts {
        assert!(api::verify_share(&pk, &binding, &req, p).unwrap());
    }
    let x = sh00::hash_message(&k.modulus, &m);
    let mut first: Option<BigUint> = None;
    for s in subsets(7, 3) {
        let chosen: Vec<_> = s.iter().map(|i| parts[*i as usize - 1].clone()).collect();
        let out = api::combine(&pk, &binding, &req, &chosen).unwrap();
        let ThresholdOutput::Signature(Signature::Sh00(y)) = &out else { unreachable!() };
        // y^e ≡ H(m) mod N.
        assert_eq!(y.modpow(&k.modulus.e, &k.modulus.n), x);
        assert!(api::verify_result(&pk, &req, &out));
        match &first {
            None => first = Some(y.clone()),
            Some(f) => assert_eq!(f, y),
        }
    }
}

#[test]
fn rsa_four_party_dealing_has_declared_size() {
    let (pk, keys) = deal(SchemeId::Sh00, 4, 1, 44);
    let PublicKey::Sh00(k) = &pk.key else { unreachable!() };
    assert_eq!(keys.len(), 4);
    assert_eq!(k.modulus.n.bits(), k.modulus.bit_length as u64);
    assert_eq!(k.delta, BigUint::from(24u32));
    assert_eq!(k.message_hash, sh00::FDH_SHA256_CTR);
}

fn frost_run(
    pk: &tcs_schemes::PublicKeyMaterial,
    keys: &[tcs_schemes::KeyShare],
    set: &[u16],
    m: &[u8],
) -> (SigningPackage, Vec<PartialResult>) {
    let mut r = rng(7);
    let mut nonces: BTreeMap<u16, _> = set
        .iter()
        .map(|i| (*i, api::frost_round1(&keys[*i as usize - 1], &mut r).unwrap()))
        .collect();
    let commitments = nonces.iter().map(|(i, n)| (*i, *n.commitment())).collect();
    let package = SigningPackage::new(&pk.params, m, set, &commitments).unwrap();
    let parts = set
        .iter()
        .map(|i| api::frost_round2(&keys[*i as usize - 1], &package, nonces.get_mut(i).unwrap()).unwrap())
        .collect();
    (package, parts)
}

#[test]
fn frost_signature_verifies_under_ed25519() {
    let (pk, keys) = deal(SchemeId::Kg20, 4, 1, 45);
    let PublicKey::Kg20(k) = &pk.key else { unreachable!() };
    for set in subsets(4, 2) {
        let m = format!("frost {set:?}").into_bytes();
        let req = Request::Sign(m.clone());
        let binding = RequestBinding::compute(&pk, &req).unwrap();
        let (package, parts) = frost_run(&pk, &keys, &set, &m);
        for p in &parts {
            assert!(api::verify_frost_share(&pk, &binding, &package, p).unwrap());
        }
        let out = api::combine_frost(&pk, &binding, &package, &parts).unwrap();
        assert!(api::verify_result(&pk, &req, &out));
        let ThresholdOutput::Signature(Signature::Kg20 { r, z }) = &out else { unreachable!() };
        // z·G = R + c·PK.
        let c = kg20::challenge(r, &k.pk, &m);
        assert_eq!(tcs_schemes::groups::EdPoint::generator() * *z, *r + k.pk * c);
        // Independent verifier.
        let vk = ed25519_dalek::VerifyingKey::from_bytes(&k.pk.compress()).unwrap();
        let sig = ed25519_dalek::Signature::from_slice(&out.to_bytes()).unwrap();
        vk.verify_strict(&m, &sig).unwrap();
        assert!(vk.verify_strict(b"other message", &sig).is_err());
    }
}

#[test]
fn frost_bad_response_breaks_the_aggregate() {
    let (pk, keys) = deal(SchemeId::Kg20, 4, 1, 46);
    let m = b"abort".to_vec();
    let req = Request::Sign(m.clone());
    let binding = RequestBinding::compute(&pk, &req).unwrap();
    let (package, mut parts) = frost_run(&pk, &keys, &[1, 2], &m);
    let one = <tcs_schemes::groups::EdScalar as tcs_schemes::groups::FieldScalar>::one();
    let ShareValue::Kg20 { z_i } = parts[1].value else { unreachable!() };
    parts[1].value = ShareValue::Kg20 { z_i: z_i + one };
    assert!(!api::verify_frost_share(&pk, &binding, &package, &parts[1]).unwrap());
    let out = api::combine_frost(&pk, &binding, &package, &parts).unwrap();
    assert!(!api::verify_result(&pk, &req, &out));
}

#[test]
fn frost_nonces_are_single_use() {
    let (pk, keys) = deal(SchemeId::Kg20, 4, 1, 47);
    let mut r = rng(8);
    let mut n1 = api::frost_round1(&keys[0], &mut r).unwrap();
    let n2 = api::frost_round1(&keys[1], &mut r).unwrap();
    let other = api::frost_round1(&keys[0], &mut r).unwrap();
    assert_ne!(n1.commitment(), other.commitment());
    let commitments = [(1, *n1.commitment()), (2, *n2.commitment())].into_iter().collect();
    let package = SigningPackage::new(&pk.params, b"m", &[1, 2], &commitments).unwrap();
    api::frost_round2(&keys[0], &package, &mut n1).unwrap();
    assert!(n1.is_consumed());
    assert_eq!(
        api::frost_round2(&keys[0], &package, &mut n1).unwrap_err(),
        SchemeError::NonceReuse
    );
}

#[test]
fn nonce_store_batches_and_consumes() {
    let mut store = tcs_schemes::NonceStore::new();
    let batch = store.precompute(3, 5, &mut rng(9));
    assert_eq!(batch.len(), 5);
    assert_eq!(store.available(), 5);
    let (slot, c) = batch[2];
    assert_eq!(store.commitment(slot), Some(&c));
    let n = store.take(slot).unwrap();
    assert_eq!(n.commitment(), &c);
    assert_eq!(store.take(slot).unwrap_err(), SchemeError::NonceReuse);
    assert_eq!(store.mark_consumed(&c).unwrap_err(), SchemeError::NonceReuse);
    assert_eq!(store.available(), 4);
    assert_eq!(store.consumed_count(), 1);
}

#[test]
fn frost_signing_set_rules() {
    let (pk, keys) = deal(SchemeId::Kg20, 7, 2, 48);
    assert_eq!(kg20::default_signing_set(&pk.params, &[7, 3, 5, 1, 2]).unwrap(), vec![1, 2, 3]);
    assert!(kg20::default_signing_set(&pk.params, &[4, 6]).is_err());
    let mut r = rng(10);
    let commitments: BTreeMap<u16, _> = [1u16, 2]
        .iter()
        .map(|i| (*i, *api::frost_round1(&keys[*i as usize - 1], &mut r).unwrap().commitment()))
        .collect();
    assert!(matches!(
        SigningPackage::new(&pk.params, b"m", &[1, 2], &commitments),
        Err(SchemeError::SigningSet(_))
    ));
    assert!(matches!(
        SigningPackage::new(&pk.params, b"m", &[1, 2, 3], &commitments),
        Err(SchemeError::SigningSet(_))
    ));
}

#[test]
fn signatures_need_a_quorum() {
    for scheme in [SchemeId::Bls04, SchemeId::Sh00] {
        for t in 1..=4u16 {
            let n = 3 * t + 1;
            let (pk, keys) = deal(scheme, n, t, 50 + t as u8);
            let m = b"q".to_vec();
            let req = Request::Sign(m.clone());
            let binding = RequestBinding::compute(&pk, &req).unwrap();
            let parts = sign_all(&keys[..t as usize], &m);
            assert!(matches!(
                api::combine(&pk, &binding, &req, &parts),
                Err(SchemeError::InsufficientShares { .. })
            ));
        }
    }
    for t in 1..=4u16 {
        let n = 3 * t + 1;
        let (pk, keys) = deal(SchemeId::Kg20, n, t, 60 + t as u8);
        let m = b"q".to_vec();
        let set: Vec<u16> = (1..=t + 1).collect();
        let req = Request::Sign(m.clone());
        let binding = RequestBinding::compute(&pk, &req).unwrap();
        let (package, parts) = frost_run(&pk, &keys, &set, &m);
        assert!(matches!(
            api::combine_frost(&pk, &binding, &package, &parts[..t as usize]),
            Err(SchemeError::InsufficientShares { .. })
        ));
    }
}
