use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use tcs_schemes::{api, KeyShare, PartialResult, Request, RequestBinding, ThresholdOutput};

use super::{MessageStats, Progress, ThresholdRoundProtocol};
use crate::error::ProtocolError;
use crate::message::{Channel, InstanceId, Payload, ProtocolMessage};

/// Executor for every non-interactive scheme: one share per party, done
/// once `t+1` of them verify.
pub struct SingleRoundProtocol {
    id: InstanceId,
    share: Arc<KeyShare>,
    request: Request,
    binding: RequestBinding,
    rng: ChaCha20Rng,
    round: u8,
    valid: BTreeMap<u16, PartialResult>,
    seen: BTreeSet<u16>,
    stats: MessageStats,
    result: Option<ThresholdOutput>,
    failure: Option<ProtocolError>,
}

impl SingleRoundProtocol {
    pub fn new(id: InstanceId, share: Arc<KeyShare>, request: Request, rng: ChaCha20Rng) -> Result<Self, ProtocolError> {
        let binding = RequestBinding::compute(&share.public, &request)?;
        Ok(SingleRoundProtocol {
            id,
            share,
            request,
            binding,
            rng,
            round: 0,
            valid: BTreeMap::new(),
            seen: BTreeSet::new(),
            stats: MessageStats::default(),
            result: None,
            failure: None,
        })
    }

    fn quorum(&self) -> usize {
        self.share.public.params.quorum()
    }

    fn progress(&self) -> Progress {
        if self.is_ready_to_finalize() {
            Progress::ReadyToFinalize
        } else {
            Progress::None
        }
    }

    pub fn valid_senders(&self) -> Vec<u16> {
        self.valid.keys().copied().collect()
    }
}

impl ThresholdRoundProtocol for SingleRoundProtocol {
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
        if self.round != 0 {
            return Err(ProtocolError::State("single-round protocol has no further rounds".into()));
        }
        let share = api::create_share(&self.share, &self.request, &mut self.rng)?;
        self.round = 1;
        Ok(Some(ProtocolMessage::new(
            self.id,
            self.share.index,
            1,
            Channel::P2p,
            &Payload::Share(share),
        )))
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
        if m.round != 1 || self.share.public.params.check_index(m.sender).is_err() {
            self.stats.rejected += 1;
            return Ok(Progress::None);
        }
        if !self.seen.insert(m.sender) {
            self.stats.duplicates += 1;
            return Ok(Progress::None);
        }
        let accepted = match m.decode_payload() {
            Ok(Payload::Share(p)) if p.index == m.sender => {
                self.stats.verifications += 1;
                matches!(api::verify_share(&self.share.public, &self.binding, &self.request, &p), Ok(true))
                    .then_some(p)
            }
            _ => None,
        };
        match accepted {
            Some(p) => {
                self.valid.insert(m.sender, p);
            }
            None => self.stats.rejected += 1,
        }
        Ok(self.progress())
    }

    fn is_ready_for_next_round(&self) -> bool {
        false
    }

    fn is_ready_to_finalize(&self) -> bool {
        !self.is_terminated() && self.valid.len() >= self.quorum()
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
                "{} valid shares, need {}",
                self.valid.len(),
                self.quorum()
            )));
        }
        let shares: Vec<PartialResult> = self.valid.values().take(self.quorum()).cloned().collect();
        let out = api::combine(&self.share.public, &self.binding, &self.request, &shares)
            .map_err(ProtocolError::from)
            .and_then(|out| {
                if api::verify_result(&self.share.public, &self.request, &out) {
                    Ok(out)
                } else {
                    Err(tcs_schemes::SchemeError::ResultVerification.into())
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
