//! RPC wire format. Every frame is a 4-byte big-endian length followed by
//! one JSON object. Requests carry `{"id", "method", "params"}`; responses
//! echo the id with either `"result"` or `"error"`. Requests on one
//! connection may be answered out of order.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tcs_core::OrchestrationError;
use tcs_schemes::SchemeError;
use thiserror::Error;
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt};

pub const MAX_FRAME: usize = 64 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpcRequest {
    pub id: u64,
    pub method: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpcResponse {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RpcError>,
}

impl RpcResponse {
    pub fn from_outcome(id: u64, outcome: Result<Value, RpcError>) -> Self {
        match outcome {
            Ok(v) => RpcResponse {
                id,
                result: Some(v),
                error: None,
            },
            Err(e) => RpcResponse {
                id,
                result: None,
                error: Some(e),
            },
        }
    }

    pub fn into_outcome(self) -> Result<Value, RpcError> {
        match (self.result, self.error) {
            (_, Some(e)) => Err(e),
            (Some(v), None) => Ok(v),
            (None, None) => Ok(Value::Null),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    UnknownMethod,
    InvalidParams,
    UnknownKey,
    KeySchemeMismatch,
    InvalidCiphertext,
    RequestKind,
    Scheme,
    Protocol,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{code:?}: {message}")]
pub struct RpcError {
    pub code: ErrorCode,
    pub message: String,
}

impl RpcError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        RpcError {
            code,
            message: message.into(),
        }
    }

    pub fn invalid_params(message: impl std::fmt::Display) -> Self {
        Self::new(ErrorCode::InvalidParams, message.to_string())
    }
}

impl From<OrchestrationError> for RpcError {
    fn from(e: OrchestrationError) -> Self {
        let code = match &e {
            OrchestrationError::UnknownKey { .. } => ErrorCode::UnknownKey,
            OrchestrationError::KeySchemeMismatch { .. } => ErrorCode::KeySchemeMismatch,
            OrchestrationError::InvalidCiphertext => ErrorCode::InvalidCiphertext,
            OrchestrationError::RequestKind(_) => ErrorCode::RequestKind,
            OrchestrationError::Scheme(_) => ErrorCode::Scheme,
            OrchestrationError::Protocol(_) => ErrorCode::Protocol,
            OrchestrationError::KeyIndex { .. } => ErrorCode::Internal,
        };
        RpcError::new(code, e.to_string())
    }
}

impl From<SchemeError> for RpcError {
    fn from(e: SchemeError) -> Self {
        RpcError::new(ErrorCode::Scheme, e.to_string())
    }
}

pub async fn write_frame<W: AsyncWrite + Unpin>(w: &mut W, body: &[u8]) -> std::io::Result<()> {
    w.write_all(&(body.len() as u32).to_be_bytes()).await?;
    w.write_all(body).await?;
    w.flush().await
}

/// `Ok(None)` on a clean end of stream.
pub async fn read_frame<R: AsyncRead + Unpin>(r: &mut R) -> std::io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len).await {
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let size = u32::from_be_bytes(len) as usize;
    if size > MAX_FRAME {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("frame of {size} bytes"),
        ));
    }
    let mut buf = vec![0u8; size];
    r.read_exact(&mut buf).await?;
    Ok(Some(buf))
}
