//! The two RPC endpoints. `protocol.*` methods run threshold protocols
//! through the instance manager; `scheme.*` methods expose the primitives
//! of the schemes library against this node's key shares.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tcs_core::{InstanceId, InstanceManager, KeyStore, PollResult, Step};
use tcs_network::Transport;
use tcs_schemes::encoding::bytes_b64;
use tcs_schemes::{
    api, Ciphertext, FrostNonceCommitment, NonceStore, PartialResult, PublicKeyMaterial, Request, RequestBinding,
    SchemeId, SigningPackage, ThresholdOutput,
};

use crate::rpc::{ErrorCode, RpcError};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubmitParams {
    pub scheme: SchemeId,
    /// Defaults to the lowercase scheme name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_id: Option<String>,
    pub request: Request,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitResult {
    pub instance_id: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PollParams {
    pub instance_id: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PollStatus {
    Pending,
    Finished,
    Failed,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PollResponse {
    pub status: PollStatus,
    /// Canonical result bytes (plaintext, signature encoding or coin value).
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_b64")]
    pub result: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<ThresholdOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Seconds from the local start of the instance to its termination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_s: Option<f64>,
}

mod opt_b64 {
    use serde::{Deserialize, Deserializer, Serializer};
    use tcs_schemes::encoding::{from_base64, to_base64};

    pub fn serialize<S: Serializer>(v: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(b) => s.serialize_str(&to_base64(b)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u8>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| from_base64(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrecomputeParams {
    pub key_id: String,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyParams {
    pub key_id: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncryptParams {
    pub key_id: String,
    #[serde(with = "bytes_b64")]
    pub label: Vec<u8>,
    #[serde(with = "bytes_b64")]
    pub plaintext: Vec<u8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiphertextParams {
    pub key_id: String,
    pub ciphertext: Ciphertext,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RequestParams {
    pub key_id: String,
    pub request: Request,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyShareParams {
    pub key_id: String,
    pub request: Request,
    pub share: PartialResult,
    /// Required for KG20 responses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package: Option<SigningPackage>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombineParams {
    pub key_id: String,
    pub request: Request,
    pub shares: Vec<PartialResult>,
    /// Required for KG20.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package: Option<SigningPackage>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyResultParams {
    pub key_id: String,
    pub request: Request,
    pub output: ThresholdOutput,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrostRound1Result {
    /// Opaque handle naming the nonces held by this node.
    pub handle: u64,
    pub commitment: FrostNonceCommitment,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrostRound2Params {
    pub key_id: String,
    pub handle: u64,
    pub package: SigningPackage,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyInfo {
    pub key_id: String,
    pub scheme: SchemeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadyResult {
    pub ready: bool,
    pub node: u16,
    pub keys: Vec<KeyInfo>,
}

pub const METHODS: &[&str] = &[
    "node.ready",
    "node.stats",
    "protocol.submit",
    "protocol.poll",
    "protocol.precompute",
    "scheme.public_key",
    "scheme.encrypt",
    "scheme.verify_ciphertext",
    "scheme.create_share",
    "scheme.frost_round1",
    "scheme.frost_round2",
    "scheme.verify_share",
    "scheme.combine",
    "scheme.verify_result",
];

/// Serves both endpoints of one node.
pub struct Handler {
    manager: Arc<InstanceManager>,
    transport: Arc<dyn Transport>,
    nonces: Mutex<HashMap<String, NonceStore>>,
}

fn parse<T: DeserializeOwned>(params: Value) -> Result<T, RpcError> {
    serde_json::from_value(params).map_err(RpcError::invalid_params)
}

fn json<T: Serialize>(v: T) -> Result<Value, RpcError> {
    serde_json::to_value(v).map_err(|e| RpcError::new(ErrorCode::Internal, e.to_string()))
}

impl Handler {
    pub fn new(manager: Arc<InstanceManager>, transport: Arc<dyn Transport>) -> Self {
        Handler {
            manager,
            transport,
            nonces: Mutex::new(HashMap::new()),
        }
    }

    pub fn manager(&self) -> &Arc<InstanceManager> {
        &self.manager
    }

    /// Hands a step's outgoing messages to the transport.
    pub fn emit(&self, step: Step) {
        for m in step.outgoing {
            if let Err(e) = self.transport.send(&m) {
                tracing::warn!(instance = %m.instance_id, round = m.round, "send failed: {e}");
            }
        }
    }

    pub fn handle(&self, method: &str, params: Value) -> Result<Value, RpcError> {
        match method {
            "node.ready" => json(self.ready()),
            "node.stats" => {
                let c = self.manager.counters();
                json(serde_json::json!({
                    "instances": self.manager.instance_count(),
                    "pending": self.manager.pending_len(),
                    "undecodable": c.undecodable,
                    "late": c.late,
                    "evicted_pending": c.evicted_pending,
                    "evicted_records": c.evicted_records,
                    "rejected_precommitments": c.rejected_precommitments,
                }))
            }
            "protocol.submit" => json(self.submit(parse(params)?)?),
            "protocol.poll" => json(self.poll(parse(params)?)?),
            "protocol.precompute" => {
                let p: PrecomputeParams = parse(params)?;
                let step = self.manager.precompute(&p.key_id, p.count)?;
                self.emit(step);
                json(serde_json::json!({ "count": p.count }))
            }
            "scheme.public_key" => {
                let p: KeyParams = parse(params)?;
                json(self.public(&p.key_id)?)
            }
            "scheme.encrypt" => {
                let p: EncryptParams = parse(params)?;
                let pk = self.public(&p.key_id)?;
                json(api::encrypt(&pk, &p.label, &p.plaintext, &mut rand::thread_rng())?)
            }
            "scheme.verify_ciphertext" => {
                let p: CiphertextParams = parse(params)?;
                json(api::verify_ciphertext(&self.public(&p.key_id)?, &p.ciphertext)?)
            }
            "scheme.create_share" => {
                let p: RequestParams = parse(params)?;
                let share = self.manager.keys().get(&p.key_id)?;
                json(api::create_share(&share, &p.request, &mut rand::thread_rng())?)
            }
            "scheme.frost_round1" => {
                let p: KeyParams = parse(params)?;
                let share = self.manager.keys().get(&p.key_id)?;
                if share.scheme != SchemeId::Kg20 {
                    return Err(RpcError::new(ErrorCode::Scheme, format!("{} has no nonce rounds", share.scheme)));
                }
                let mut nonces = self.nonces.lock();
                let store = nonces.entry(p.key_id).or_default();
                let (handle, commitment) = store.precompute(share.index, 1, &mut rand::thread_rng())[0];
                json(FrostRound1Result { handle, commitment })
            }
            "scheme.frost_round2" => {
                let p: FrostRound2Params = parse(params)?;
                let share = self.manager.keys().get(&p.key_id)?;
                let mut nonces = {
                    let mut stores = self.nonces.lock();
                    let store = stores
                        .get_mut(&p.key_id)
                        .ok_or_else(|| RpcError::invalid_params("no nonces issued for this key"))?;
                    store.take(p.handle)?
                };
                json(api::frost_round2(&share, &p.package, &mut nonces)?)
            }
            "scheme.verify_share" => {
                let p: VerifyShareParams = parse(params)?;
                let pk = self.public(&p.key_id)?;
                let binding = RequestBinding::compute(&pk, &p.request)?;
                let ok = match &p.package {
                    Some(pkg) => api::verify_frost_share(&pk, &binding, pkg, &p.share)?,
                    None => api::verify_share(&pk, &binding, &p.request, &p.share)?,
                };
                json(ok)
            }
            "scheme.combine" => {
                let p: CombineParams = parse(params)?;
                let pk = self.public(&p.key_id)?;
                let binding = RequestBinding::compute(&pk, &p.request)?;
                let out = match &p.package {
                    Some(pkg) => api::combine_frost(&pk, &binding, pkg, &p.shares)?,
                    None => api::combine(&pk, &binding, &p.request, &p.shares)?,
                };
                json(out)
            }
            "scheme.verify_result" => {
                let p: VerifyResultParams = parse(params)?;
                json(api::verify_result(&self.public(&p.key_id)?, &p.request, &p.output))
            }
            other => Err(RpcError::new(ErrorCode::UnknownMethod, format!("no method {other}"))),
        }
    }

    fn public(&self, key_id: &str) -> Result<PublicKeyMaterial, RpcError> {
        Ok(self.manager.keys().public(key_id)?)
    }

    pub fn ready(&self) -> ReadyResult {
        ReadyResult {
            ready: true,
            node: self.manager.node(),
            keys: self
                .manager
                .keys()
                .key_ids()
                .map(|(key_id, scheme)| KeyInfo {
                    key_id: key_id.to_string(),
                    scheme,
                })
                .collect(),
        }
    }

    pub fn submit(&self, p: SubmitParams) -> Result<SubmitResult, RpcError> {
        let key_id = p.key_id.unwrap_or_else(|| KeyStore::default_key_id(p.scheme));
        let (id, step) = self.manager.start_instance(p.scheme, &key_id, p.request)?;
        self.emit(step);
        Ok(SubmitResult {
            instance_id: id.to_hex(),
        })
    }

    pub fn poll(&self, p: PollParams) -> Result<PollResponse, RpcError> {
        let id = InstanceId::from_hex(&p.instance_id).map_err(RpcError::invalid_params)?;
        let latency_s = self
            .manager
            .record(&id)
            .and_then(|r| Some(r.finished_at?.saturating_sub(r.started_at).as_secs_f64()));
        Ok(match self.manager.poll_result(&id) {
            PollResult::Pending => PollResponse {
                status: PollStatus::Pending,
                result: None,
                output: None,
                error: None,
                latency_s: None,
            },
            PollResult::Finished(out) => PollResponse {
                status: PollStatus::Finished,
                result: Some(out.to_bytes()),
                output: Some(out),
                error: None,
                latency_s,
            },
            PollResult::Failed(e) => PollResponse {
                status: PollStatus::Failed,
                result: None,
                output: None,
                error: Some(e),
                latency_s,
            },
            PollResult::Unknown => PollResponse {
                status: PollStatus::Unknown,
                result: None,
                output: None,
                error: None,
                latency_s: None,
            },
        })
    }
}
