//! The service layer: a protocol API and a scheme API over framed JSON
//! RPC, the node runtime behind them and the trusted dealer.

pub mod api;
pub mod client;
pub mod error;
pub mod keyfiles;
pub mod node;
pub mod rpc;

pub use api::{Handler, PollResponse, PollStatus};
pub use client::RpcClient;
pub use error::ServiceError;
pub use keyfiles::{deal_to_dir, load_auth, load_keystore, load_public, parse_seed, DealSpec};
pub use node::{serve, serve_with, Inbox, Node, NodeOptions};
pub use rpc::{ErrorCode, RpcError, RpcRequest, RpcResponse};
