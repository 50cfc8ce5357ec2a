use std::path::Path;

use tcs_core::OrchestrationError;
use tcs_network::NetError;
use tcs_schemes::SchemeError;
use thiserror::Error;

use crate::rpc::RpcError;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("key material: {0}")]
    Keys(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Orchestration(#[from] OrchestrationError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("rpc: {0}")]
    Rpc(#[from] RpcError),
    #[error("rpc transport: {0}")]
    Transport(String),
}

impl ServiceError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        ServiceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
