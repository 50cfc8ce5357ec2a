//! Async RPC client for one node.

use std::net::SocketAddr;
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use tcs_schemes::{Ciphertext, PartialResult, Request, SchemeId, ThresholdOutput};
use tokio::net::TcpStream;

use crate::api::{
    CombineParams, EncryptParams, KeyParams, PollParams, PollResponse, PollStatus, ReadyResult, RequestParams,
    SubmitParams, SubmitResult, VerifyResultParams, VerifyShareParams,
};
use crate::error::ServiceError;
use crate::rpc::{read_frame, write_frame, ErrorCode, RpcError, RpcRequest, RpcResponse};

pub struct RpcClient {
    stream: TcpStream,
    next_id: u64,
}

impl RpcClient {
    pub async fn connect(addr: SocketAddr) -> Result<Self, ServiceError> {
        let stream = TcpStream::connect(addr)
            .await
            .map_err(|e| ServiceError::Transport(format!("connect {addr}: {e}")))?;
        let _ = stream.set_nodelay(true);
        Ok(RpcClient { stream, next_id: 1 })
    }

    /// Retries the connection until the node answers `node.ready` or the
    /// deadline passes.
    pub async fn connect_ready(addr: SocketAddr, timeout: Duration) -> Result<Self, ServiceError> {
        let deadline = Instant::now() + timeout;
        loop {
            if let Ok(mut c) = Self::connect(addr).await {
                if let Ok(r) = c.ready().await {
                    if r.ready {
                        return Ok(c);
                    }
                }
            }
            if Instant::now() >= deadline {
                return Err(ServiceError::Transport(format!("node at {addr} not ready")));
            }
            tokio::time::sleep(Duration::from_millis(50)).await;
        }
    }

    pub async fn call_raw(&mut self, method: &str, params: Value) -> Result<Value, ServiceError> {
        let id = self.next_id;
        self.next_id += 1;
        let req = RpcRequest {
            id,
            method: method.to_string(),
            params,
        };
        let body = serde_json::to_vec(&req).expect("request encodes");
        write_frame(&mut self.stream, &body)
            .await
            .map_err(|e| ServiceError::Transport(e.to_string()))?;
        loop {
            let frame = read_frame(&mut self.stream)
                .await
                .map_err(|e| ServiceError::Transport(e.to_string()))?
                .ok_or_else(|| ServiceError::Transport("connection closed".into()))?;
            let resp: RpcResponse =
                serde_json::from_slice(&frame).map_err(|e| ServiceError::Transport(e.to_string()))?;
            if resp.id == id {
                return Ok(resp.into_outcome()?);
            }
        }
    }

    pub async fn call<P: Serialize, R: DeserializeOwned>(&mut self, method: &str, params: P) -> Result<R, ServiceError> {
        let v = self
            .call_raw(method, serde_json::to_value(params).expect("params encode"))
            .await?;
        serde_json::from_value(v).map_err(|e| RpcError::new(ErrorCode::Malformed, e.to_string()).into())
    }

    pub async fn ready(&mut self) -> Result<ReadyResult, ServiceError> {
        self.call("node.ready", Value::Null).await
    }

    pub async fn submit(&mut self, scheme: SchemeId, key_id: Option<&str>, request: Request) -> Result<String, ServiceError> {
        let r: SubmitResult = self
            .call(
                "protocol.submit",
                SubmitParams {
                    scheme,
                    key_id: key_id.map(str::to_string),
                    request,
                },
            )
            .await?;
        Ok(r.instance_id)
    }

    pub async fn poll(&mut self, instance_id: &str) -> Result<PollResponse, ServiceError> {
        self.call(
            "protocol.poll",
            PollParams {
                instance_id: instance_id.to_string(),
            },
        )
        .await
    }

    /// Polls until the instance terminates or the deadline passes.
    pub async fn wait(&mut self, instance_id: &str, timeout: Duration) -> Result<PollResponse, ServiceError> {
        let deadline = Instant::now() + timeout;
        loop {
            let r = self.poll(instance_id).await?;
            if matches!(r.status, PollStatus::Finished | PollStatus::Failed) || Instant::now() >= deadline {
                return Ok(r);
            }
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }

    pub async fn encrypt(&mut self, key_id: &str, label: &[u8], plaintext: &[u8]) -> Result<Ciphertext, ServiceError> {
        self.call(
            "scheme.encrypt",
            EncryptParams {
                key_id: key_id.into(),
                label: label.to_vec(),
                plaintext: plaintext.to_vec(),
            },
        )
        .await
    }

    pub async fn public_key(&mut self, key_id: &str) -> Result<tcs_schemes::PublicKeyMaterial, ServiceError> {
        self.call("scheme.public_key", KeyParams { key_id: key_id.into() }).await
    }

    pub async fn create_share(&mut self, key_id: &str, request: &Request) -> Result<PartialResult, ServiceError> {
        self.call(
            "scheme.create_share",
            RequestParams {
                key_id: key_id.into(),
                request: request.clone(),
            },
        )
        .await
    }

    pub async fn verify_share(&mut self, key_id: &str, request: &Request, share: &PartialResult) -> Result<bool, ServiceError> {
        self.call(
            "scheme.verify_share",
            VerifyShareParams {
                key_id: key_id.into(),
                request: request.clone(),
                share: share.clone(),
                package: None,
            },
        )
        .await
    }

    pub async fn combine(
        &mut self,
        key_id: &str,
        request: &Request,
        shares: &[PartialResult],
    ) -> Result<ThresholdOutput, ServiceError> {
        self.call(
            "scheme.combine",
            CombineParams {
                key_id: key_id.into(),
                request: request.clone(),
                shares: shares.to_vec(),
                package: None,
            },
        )
        .await
    }

    pub async fn verify_result(
        &mut self,
        key_id: &str,
        request: &Request,
        output: &ThresholdOutput,
    ) -> Result<bool, ServiceError> {
        self.call(
            "scheme.verify_result",
            VerifyResultParams {
                key_id: key_id.into(),
                request: request.clone(),
                output: output.clone(),
            },
        )
        .await
    }
}
