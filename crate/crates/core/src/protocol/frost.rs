use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use tcs_schemes::{
    api, FrostNonceCommitment, FrostNonces, KeyShare, PartialResult, RequestBinding, Request, SigningPackage,
    ThresholdOutput,
};

use super::{MessageStats, Progress, ThresholdRoundProtocol};
use crate::error::ProtocolError;
use crate::message::{Channel, InstanceId, Payload, ProtocolMessage};

const COMMIT_ROUND: u8 = 1;
const RESPONSE_ROUND: u8 = 2;

/// Two-round FROST signing. Parties outside the signing set send nothing
/// but still collect commitments and responses and aggregate.
pub struct FrostProtocol {
    id: InstanceId,
    share: Arc<KeyShare>,
    message: Vec<u8>,
    binding: RequestBinding,
    signing_set: Vec<u16>,
    commit_channel: Channel,
    rng: ChaCha20Rng,
    round: u8,
    /// Rounds actually executed by `do_round` (round 1 is skipped when the
    /// commitments were precomputed).
    transitions: u8,
    nonces: Option<FrostNonces>,
    commitments: BTreeMap<u16, FrostNonceCommitment>,
    package: Option<SigningPackage>,
    responses: BTreeMap<u16, PartialResult>,
    early_responses: BTreeMap<u16, PartialResult>,
    seen: BTreeSet<(u16, u8)>,
    stats: MessageStats,
    result: Option<ThresholdOutput>,
    failure: Option<ProtocolError>,
}

impl FrostProtocol {
    /// Fresh instance that will run both rounds.
    pub fn new(
        id: InstanceId,
        share: Arc<KeyShare>,
        message: Vec<u8>,
        signing_set: Vec<u16>,
        tob: bool,
        rng: ChaCha20Rng,
    ) -> Result<Self, ProtocolError> {
        let binding = RequestBinding::compute(&share.public, &Request::Sign(message.clone()))?;
        let mut signing_set = signing_set;
        signing_set.sort_unstable();
        signing_set.dedup();
        if signing_set.len() != share.public.params.quorum() {
            return Err(ProtocolError::State(format!(
                "signing set of {} parties, need {}",
                signing_set.len(),
                share.public.params.quorum()
            )));
        }
        Ok(FrostProtocol {
            id,
            share,
            message,
            binding,
            signing_set,
            commit_channel: if tob { Channel::Tob } else { Channel::P2p },
            rng,
            round: 0,
            transitions: 0,
            nonces: None,
            commitments: BTreeMap::new(),
            package: None,
            responses: BTreeMap::new(),
            early_responses: BTreeMap::new(),
            seen: BTreeSet::new(),
            stats: MessageStats::default(),
            result: None,
            failure: None,
        })
    }

    /// Instance whose round-1 commitments were published in advance. Only
    /// the response round remains.
    pub fn with_precomputed(
        id: InstanceId,
        share: Arc<KeyShare>,
        message: Vec<u8>,
        commitments: BTreeMap<u16, FrostNonceCommitment>,
        own_nonces: Option<FrostNonces>,
        rng: ChaCha20Rng,
    ) -> Result<Self, ProtocolError> {
        let set: Vec<u16> = commitments.keys().copied().collect();
        let mut p = Self::new(id, share, message, set, false, rng)?;
        let own = p.share.index;
        match (&own_nonces, p.signing_set.contains(&own)) {
            (Some(n), true) if commitments.get(&own) == Some(n.commitment()) => {}
            (None, false) => {}
            _ => return Err(ProtocolError::State("own precomputed nonces do not match the signing set".into())),
        }
        p.nonces = own_nonces;
        p.commitments = commitments;
        p.round = COMMIT_ROUND;
        p.build_package()?;
        Ok(p)
    }

    pub fn signing_set(&self) -> &[u16] {
        &self.signing_set
    }

    pub fn rounds_executed(&self) -> u8 {
        self.transitions
    }

    fn is_member(&self) -> bool {
        self.signing_set.contains(&self.share.index)
    }

    fn build_package(&mut self) -> Result<(), ProtocolError> {
        if self.package.is_some() || self.commitments.len() != self.signing_set.len() {
            return Ok(());
        }
        let package = SigningPackage::new(&self.share.public.params, &self.message, &self.signing_set, &self.commitments)?;
        self.package = Some(package);
        let early = std::mem::take(&mut self.early_responses);
        for (_, p) in early {
            self.record_response(p)?;
        }
        Ok(())
    }

    fn record_response(&mut self, p: PartialResult) -> Result<(), ProtocolError> {
        let package = self.package.as_ref().expect("package exists");
        self.stats.verifications += 1;
        match api::verify_frost_share(&self.share.public, &self.binding, package, &p) {
            Ok(true) => {
                self.responses.insert(p.index, p);
                Ok(())
            }
            _ => {
                self.stats.rejected += 1;
                let e = ProtocolError::Abort(format!("invalid signature response from party {}", p.index));
                self.failure = Some(e.clone());
                Err(e)
            }
        }
    }

    fn progress(&self) -> Progress {
        if self.is_ready_to_finalize() {
            Progress::ReadyToFinalize
        } else if self.is_ready_for_next_round() {
            Progress::ReadyForNextRound
        } else {
            Progress::None
        }
    }
}

impl ThresholdRoundProtocol for FrostProtocol {
    fn instance_id(&self) -> InstanceId {
        self.id
    }

    fn current_round(&self) -> u8 {
        self.round
    }

    fn do_round(&mut self) -> Result<Option<ProtocolMessage>, ProtocolError> {
        if self.is_terminated() {
            return Err(ProtocolError::Terminated);
        }
        match self.round {
            0 => {
                self.round = COMMIT_ROUND;
                self.transitions += 1;
                if !self.is_member() {
                    return Ok(None);
                }
                let nonces = api::frost_round1(&self.share, &mut self.rng)?;
                let c = *nonces.commitment();
                self.nonces = Some(nonces);
                Ok(Some(ProtocolMessage::new(
                    self.id,
                    self.share.index,
                    COMMIT_ROUND,
                    self.commit_channel,
                    &Payload::Commitment(c),
                )))
            }
            COMMIT_ROUND => {
                if !self.is_ready_for_next_round() {
                    return Err(ProtocolError::State("signing-set commitments incomplete".into()));
                }
                self.round = RESPONSE_ROUND;
                self.transitions += 1;
                if !self.is_member() {
                    return Ok(None);
                }
                let package = self.package.as_ref().expect("package built with all commitments");
                let nonces = self
                    .nonces
                    .as_mut()
                    .ok_or_else(|| ProtocolError::State("no nonces for this party".into()))?;
                let share = api::frost_round2(&self.share, package, nonces)?;
                Ok(Some(ProtocolMessage::new(
                    self.id,
                    self.share.index,
                    RESPONSE_ROUND,
                    Channel::P2p,
                    &Payload::Share(share),
                )))
            }
            _ => Err(ProtocolError::State("FROST has only two rounds".into())),
        }
    }

    fn update(&mut self, m: &ProtocolMessage) -> Result<Progress, ProtocolError> {
        if m.instance_id != self.id {
            return Err(ProtocolError::WrongInstance {
                expected: self.id,
                got: m.instance_id,
            });
        }
        if self.is_terminated() {
            self.stats.late += 1;
            return Ok(Progress::None);
        }
        self.stats.received += 1;
        if !self.signing_set.contains(&m.sender) || !(COMMIT_ROUND..=RESPONSE_ROUND).contains(&m.round) {
            self.stats.rejected += 1;
            return Ok(Progress::None);
        }
        if !self.seen.insert((m.sender, m.round)) {
            self.stats.duplicates += 1;
            return Ok(Progress::None);
        }
        match (m.round, m.decode_payload()) {
            (COMMIT_ROUND, Ok(Payload::Commitment(c))) if c.index == m.sender => {
                if self.package.is_some() {
                    // Precomputed instance: commitments are already fixed.
                    self.stats.duplicates += 1;
                    return Ok(Progress::None);
                }
                self.commitments.insert(m.sender, c);
                self.build_package()?;
            }
            (RESPONSE_ROUND, Ok(Payload::Share(p))) if p.index == m.sender => {
                if self.package.is_some() {
                    self.record_response(p)?;
                } else {
                    self.early_responses.insert(m.sender, p);
                }
            }
            _ => {
                self.stats.rejected += 1;
                return Ok(Progress::None);
            }
        }
        Ok(self.progress())
    }

    fn is_ready_for_next_round(&self) -> bool {
        !self.is_terminated() && self.round == COMMIT_ROUND && self.package.is_some()
    }

    fn is_ready_to_finalize(&self) -> bool {
        !self.is_terminated() && self.package.is_some() && self.responses.len() == self.signing_set.len()
    }

    fn finalize(&mut self) -> Result<ThresholdOutput, ProtocolError> {
        if let Some(r) = &self.result {
            return Ok(r.clone());
        }
        if let Some(e) = &self.failure {
            return Err(e.clone());
        }
        if !self.is_ready_to_finalize() {
            return Err(ProtocolError::State(format!(
                "{} of {} signing responses",
                self.responses.len(),
                self.signing_set.len()
            )));
        }
        let package = self.package.as_ref().expect("ready implies package");
        let shares: Vec<PartialResult> = self.responses.values().cloned().collect();
        let out = api::combine_frost(&self.share.public, &self.binding, package, &shares)
            .map_err(ProtocolError::from)
            .and_then(|out| {
                if api::verify_result(&self.share.public, &Request::Sign(self.message.clone()), &out) {
                    Ok(out)
                } else {
                    Err(ProtocolError::Abort("aggregate signature does not verify".into()))
                }
            });
        match out {
            Ok(out) => {
                self.result = Some(out.clone());
                Ok(out)
            }
            Err(e) => {
                self.failure = Some(e.clone());
                Err(e)
            }
        }
    }

    fn is_terminated(&self) -> bool {
        self.result.is_some() || self.failure.is_some()
    }

    fn stats(&self) -> MessageStats {
        self.stats
    }
}
