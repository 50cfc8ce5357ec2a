use tcs_schemes::{SchemeError, SchemeId};
use thiserror::Error;

use crate::message::InstanceId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("protocol instance has terminated")]
    Terminated,
    #[error("protocol state error: {0}")]
    State(String),
    #[error("message for instance {got} delivered to {expected}")]
    WrongInstance { expected: InstanceId, got: InstanceId },
    #[error("undecodable message: {0}")]
    Decode(String),
    #[error("protocol aborted: {0}")]
    Abort(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrchestrationError {
    #[error("unknown key {key_id}")]
    UnknownKey { key_id: String },
    #[error("key {key_id} belongs to {actual}, request names {requested}")]
    KeySchemeMismatch {
        key_id: String,
        actual: SchemeId,
        requested: SchemeId,
    },
    #[error("key {key_id} holds share {index}, this node is {node}")]
    KeyIndex { key_id: String, index: u16, node: u16 },
    #[error("ciphertext failed the validity check")]
    InvalidCiphertext,
    #[error("request does not fit scheme {0}")]
    RequestKind(SchemeId),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}
