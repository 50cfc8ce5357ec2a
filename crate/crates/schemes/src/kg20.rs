//! KG20: two-round FROST Schnorr signatures over Ed25519.
//!
//! Round 1 publishes nonce commitments `(D_i, E_i)`; round 2 returns
//! `z_i = d_i + e_i·ρ_i + λ_i·s_i·c`. The aggregate `(R, z)` is an ordinary
//! Ed25519-layout Schnorr signature. The scheme is not robust: one bad
//! response makes the aggregate invalid.

use std::collections::{BTreeMap, HashSet};

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha512};

use crate::error::{Result, SchemeError};
use crate::groups::{
    hash_to_scalar, lagrange_coefficient, shamir_share, EdPoint, EdScalar, FieldScalar,
    PrimeGroup, Transcript,
};
use crate::params::ThresholdParams;
use crate::request::ShareValue;

const TAG_RHO: &[u8] = b"tcs/KG20/binding-factor";

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

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrostNonceCommitment {
    pub index: u16,
    /// `D_i = d_i·G`.
    pub hiding: EdPoint,
    /// `E_i = e_i·G`.
    pub binding: EdPoint,
}

impl FrostNonceCommitment {
    fn key(&self) -> [u8; 64] {
        let mut k = [0u8; 64];
        k[..32].copy_from_slice(&self.hiding.compress());
        k[32..].copy_from_slice(&self.binding.compress());
        k
    }
}

/// Secret nonce pair. Usable for exactly one response.
#[derive(Debug)]
pub struct FrostNonces {
    d: EdScalar,
    e: EdScalar,
    commitment: FrostNonceCommitment,
    consumed: bool,
}

impl FrostNonces {
    pub fn commitment(&self) -> &FrostNonceCommitment {
        &self.commitment
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    fn take(&mut self) -> Result<(EdScalar, EdScalar)> {
        if self.consumed {
            return Err(SchemeError::NonceReuse);
        }
        self.consumed = true;
        let out = (self.d, self.e);
        self.d = EdScalar::zero();
        self.e = EdScalar::zero();
        Ok(out)
    }
}

pub fn round1<R: RngCore + CryptoRng>(index: u16, rng: &mut R) -> FrostNonces {
    let d = EdScalar::random(rng);
    let e = EdScalar::random(rng);
    let g = EdPoint::generator();
    FrostNonces {
        d,
        e,
        commitment: FrostNonceCommitment {
            index,
            hiding: g * d,
            binding: g * e,
        },
        consumed: false,
    }
}

/// Precomputed nonces of one party, addressed by slot number. Tracks every
/// commitment it ever consumed so that none can be used twice.
#[derive(Debug, Default)]
pub struct NonceStore {
    slots: BTreeMap<u64, FrostNonces>,
    next_slot: u64,
    consumed: HashSet<[u8; 64]>,
}

impl NonceStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Generates `k` fresh nonce pairs and returns their slots and
    /// commitments.
    pub fn precompute<R: RngCore + CryptoRng>(
        &mut self,
        index: u16,
        k: usize,
        rng: &mut R,
    ) -> Vec<(u64, FrostNonceCommitment)> {
        (0..k)
            .map(|_| {
                let nonces = round1(index, rng);
                let slot = self.next_slot;
                self.next_slot += 1;
                let c = nonces.commitment;
                self.slots.insert(slot, nonces);
                (slot, c)
            })
            .collect()
    }

    pub fn available(&self) -> usize {
        self.slots.len()
    }

    pub fn commitment(&self, slot: u64) -> Option<&FrostNonceCommitment> {
        self.slots.get(&slot).map(|n| &n.commitment)
    }

    /// Removes the nonces of `slot`. A second take of the same slot fails.
    pub fn take(&mut self, slot: u64) -> Result<FrostNonces> {
        let nonces = self.slots.remove(&slot).ok_or(SchemeError::NonceReuse)?;
        self.mark_consumed(&nonces.commitment)?;
        Ok(nonces)
    }

    /// Records a commitment as used; errors if it already was.
    pub fn mark_consumed(&mut self, c: &FrostNonceCommitment) -> Result<()> {
        if !self.consumed.insert(c.key()) {
            return Err(SchemeError::NonceReuse);
        }
        Ok(())
    }

    pub fn consumed_count(&self) -> usize {
        self.consumed.len()
    }
}

/// Everything round 2 is computed over: the message, the signing set and
/// one commitment per member, ordered by index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigningPackage {
    #[serde(with = "crate::encoding::bytes_b64")]
    pub message: Vec<u8>,
    pub commitments: Vec<FrostNonceCommitment>,
}

impl SigningPackage {
    pub fn new(
        params: &ThresholdParams,
        message: &[u8],
        signing_set: &[u16],
        commitments: &BTreeMap<u16, FrostNonceCommitment>,
    ) -> Result<Self> {
        let mut set = signing_set.to_vec();
        set.sort_unstable();
        if set.len() != params.quorum() {
            return Err(SchemeError::SigningSet(format!(
                "signing set has {} members, need exactly {}",
                set.len(),
                params.quorum()
            )));
        }
        crate::groups::check_subset(params, &set)?;
        if commitments.len() != set.len() || !set.iter().all(|i| commitments.contains_key(i)) {
            return Err(SchemeError::SigningSet("commitments do not cover the signing set".into()));
        }
        let commitments = set
            .iter()
            .map(|i| {
                let c = commitments[i];
                if c.index != *i {
                    return Err(SchemeError::SigningSet(format!("commitment of {} filed under {i}", c.index)));
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SigningPackage {
            message: message.to_vec(),
            commitments,
        })
    }

    pub fn signing_set(&self) -> Vec<u16> {
        self.commitments.iter().map(|c| c.index).collect()
    }

    fn commitment_of(&self, index: u16) -> Result<&FrostNonceCommitment> {
        self.commitments
            .iter()
            .find(|c| c.index == index)
            .ok_or(SchemeError::NotInSubset(index))
    }

    /// `ρ_i = H(i, m, B)` over the full commitment list `B`.
    pub fn binding_factor(&self, index: u16) -> EdScalar {
        let mut tr = Transcript::new();
        tr.append_u16(index).append(&self.message);
        for c in &self.commitments {
            tr.append_u16(c.index).append_point(&c.hiding).append_point(&c.binding);
        }
        hash_to_scalar(TAG_RHO, tr.as_bytes())
    }

    /// `R = Σ D_i + ρ_i·E_i`.
    pub fn group_commitment(&self) -> EdPoint {
        self.commitments.iter().fold(EdPoint::identity(), |acc, c| {
            acc + c.hiding + c.binding * self.binding_factor(c.index)
        })
    }
}

/// Ed25519 challenge `SHA-512(R ‖ A ‖ M) mod ℓ`.
pub fn challenge(r: &EdPoint, pk: &EdPoint, message: &[u8]) -> EdScalar {
    let mut h = Sha512::new();
    h.update(r.compress());
    h.update(pk.compress());
    h.update(message);
    EdScalar::from_wide(&h.finalize().into())
}

/// Lowest `t+1` indices among the live parties.
pub fn default_signing_set(params: &ThresholdParams, live: &[u16]) -> Result<Vec<u16>> {
    let mut live: Vec<u16> = live.iter().copied().filter(|i| params.check_index(*i).is_ok()).collect();
    live.sort_unstable();
    live.dedup();
    if live.len() < params.quorum() {
        return Err(SchemeError::SigningSet(format!(
            "{} live parties, need {}",
            live.len(),
            params.quorum()
        )));
    }
    live.truncate(params.quorum());
    Ok(live)
}

pub fn round2(
    params: &ThresholdParams,
    pk: &PublicKey,
    index: u16,
    secret: &EdScalar,
    package: &SigningPackage,
    nonces: &mut FrostNonces,
) -> Result<ShareValue> {
    let own = package.commitment_of(index)?;
    if *own != nonces.commitment {
        return Err(SchemeError::SigningSet("own commitment in package does not match nonces".into()));
    }
    let set = package.signing_set();
    let lambda = lagrange_coefficient(params, &set, index, EdScalar::zero())?;
    let r = package.group_commitment();
    let c = challenge(&r, &pk.pk, &package.message);
    let rho = package.binding_factor(index);
    let (d, e) = nonces.take()?;
    Ok(ShareValue::Kg20 {
        z_i: d + e * rho + lambda * *secret * c,
    })
}

/// `z_i·G = D_i + ρ_i·E_i + λ_i·c·vk_i`.
pub fn verify_response(
    params: &ThresholdParams,
    pk: &PublicKey,
    package: &SigningPackage,
    index: u16,
    value: &ShareValue,
) -> Result<bool> {
    let ShareValue::Kg20 { z_i } = value else {
        return Err(SchemeError::Malformed("expected a KG20 share".into()));
    };
    let own = package.commitment_of(index)?;
    let set = package.signing_set();
    let lambda = lagrange_coefficient(params, &set, index, EdScalar::zero())?;
    let c = challenge(&package.group_commitment(), &pk.pk, &package.message);
    let rho = package.binding_factor(index);
    let vk = pk.verification_keys[index as usize - 1];
    Ok(EdPoint::generator() * *z_i == own.hiding + own.binding * rho + vk * (lambda * c))
}

/// Sums the responses of the full signing set into `(R, z)`.
pub fn aggregate(package: &SigningPackage, shares: &[(u16, &ShareValue)]) -> Result<(EdPoint, EdScalar)> {
    let set = package.signing_set();
    let mut seen = Vec::with_capacity(shares.len());
    let mut z = EdScalar::zero();
    for (i, v) in shares {
        if !set.contains(i) {
            return Err(SchemeError::NotInSubset(*i));
        }
        if seen.contains(i) {
            return Err(SchemeError::DuplicateIndex(*i));
        }
        seen.push(*i);
        let ShareValue::Kg20 { z_i } = v else {
            return Err(SchemeError::Malformed("expected a KG20 share".into()));
        };
        z = z + *z_i;
    }
    if seen.len() != set.len() {
        return Err(SchemeError::InsufficientShares {
            needed: set.len(),
            got: seen.len(),
        });
    }
    Ok((package.group_commitment(), z))
}

/// Single-party Schnorr verification `z·G = R + c·A`.
pub fn verify(pk: &EdPoint, message: &[u8], r: &EdPoint, z: &EdScalar) -> bool {
    EdPoint::generator() * *z == *r + *pk * challenge(r, pk, message)
}
