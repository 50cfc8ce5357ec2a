use std::path::Path;

use tcs_core::OrchestrationError;
use tcs_network::NetError;
use tcs_schemes::SchemeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("metrics: {0}")]
    Metrics(String),
    #[error("plan: {0}")]
    Plan(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("node unreachable: {0}")]
    Unreachable(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Orchestration(#[from] OrchestrationError),
    #[error(transparent)]
    Net(#[from] NetError),
}

impl BenchError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
