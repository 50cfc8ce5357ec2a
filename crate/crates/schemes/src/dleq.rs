//! Non-interactive proof of equality of discrete logarithms
//! (Chaum–Pedersen with a Fiat–Shamir challenge).

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::groups::{hash_to_scalar, FieldScalar, PrimeGroup, Transcript};

/// Proof that `log_g(x_g) = log_h(x_h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + serde::de::DeserializeOwned")]
pub struct DleqProof<S> {
    pub challenge: S,
    pub response: S,
}

/// Statement of a DLEQ proof, bound to a context (request binding, party
/// index) that is hashed into the challenge.
pub struct DleqStatement<'a, G> {
    pub g: G,
    pub x_g: G,
    pub h: G,
    pub x_h: G,
    pub context: &'a [u8],
}

impl<G: PrimeGroup> DleqStatement<'_, G> {
    fn challenge(&self, tag: &[u8], a_g: &G, a_h: &G) -> G::Scalar {
        let mut tr = Transcript::new();
        tr.append(self.context)
            .append_point(&self.g)
            .append_point(&self.x_g)
            .append_point(&self.h)
            .append_point(&self.x_h)
            .append_point(a_g)
            .append_point(a_h);
        hash_to_scalar(tag, tr.as_bytes())
    }

    pub fn prove<R: RngCore + CryptoRng>(
        &self,
        tag: &[u8],
        witness: &G::Scalar,
        rng: &mut R,
    ) -> DleqProof<G::Scalar> {
        let k = G::Scalar::random(rng);
        let a_g = self.g * k;
        let a_h = self.h * k;
        let challenge = self.challenge(tag, &a_g, &a_h);
        DleqProof {
            challenge,
            response: k - challenge * *witness,
        }
    }

    pub fn verify(&self, tag: &[u8], proof: &DleqProof<G::Scalar>) -> bool {
        let a_g = self.g * proof.response + self.x_g * proof.challenge;
        let a_h = self.h * proof.response + self.x_h * proof.challenge;
        self.challenge(tag, &a_g, &a_h) == proof.challenge
    }
}
