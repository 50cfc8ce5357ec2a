use std::path::Path;
use std::time::Duration;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::NetError;

/// One-way delay distribution of a link, in milliseconds. Normal samples
/// are clamped at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Delay {
    Constant { ms: f64 },
    Normal { mean_ms: f64, sd_ms: f64 },
}

impl Delay {
    pub fn constant(ms: f64) -> Self {
        Delay::Constant { ms }
    }

    pub fn mean_ms(&self) -> f64 {
        match self {
            Delay::Constant { ms } => *ms,
            Delay::Normal { mean_ms, .. } => *mean_ms,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Duration {
        let ms = match self {
            Delay::Constant { ms } => *ms,
            Delay::Normal { mean_ms, sd_ms } => {
                if *sd_ms == 0.0 {
                    *mean_ms
                } else {
                    Normal::new(*mean_ms, *sd_ms).expect("validated sd").sample(rng)
                }
            }
        };
        Duration::from_secs_f64(ms.max(0.0) / 1000.0)
    }

    fn validate(&self) -> Result<(), NetError> {
        let ok = match self {
            Delay::Constant { ms } => ms.is_finite() && *ms >= 0.0,
            Delay::Normal { mean_ms, sd_ms } => {
                mean_ms.is_finite() && *mean_ms >= 0.0 && sd_ms.is_finite() && *sd_ms >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(NetError::Config(format!("invalid delay {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencyModel {
    /// Same distribution on every link.
    Uniform { delay: Delay },
    /// Nodes placed in regions round-robin (node `i` in region
    /// `(i-1) mod r`); `matrix[a][b]` is the delay from region `a` to `b`.
    Regions { regions: Vec<String>, matrix: Vec<Vec<Delay>> },
}

impl LatencyModel {
    pub fn constant(ms: f64) -> Self {
        LatencyModel::Uniform { delay: Delay::constant(ms) }
    }

    pub fn region_of(&self, node: u16) -> usize {
        match self {
            LatencyModel::Uniform { .. } => 0,
            LatencyModel::Regions { regions, .. } => (node as usize - 1) % regions.len(),
        }
    }

    pub fn link(&self, from: u16, to: u16) -> &Delay {
        match self {
            LatencyModel::Uniform { delay } => delay,
            LatencyModel::Regions { matrix, .. } => &matrix[self.region_of(from)][self.region_of(to)],
        }
    }

    /// Delay of one message; sending to oneself is free.
    pub fn sample<R: Rng + ?Sized>(&self, from: u16, to: u16, rng: &mut R) -> Duration {
        if from == to {
            return Duration::ZERO;
        }
        self.link(from, to).sample(rng)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        match self {
            LatencyModel::Uniform { delay } => delay.validate(),
            LatencyModel::Regions { regions, matrix } => {
                if regions.is_empty()
                    || matrix.len() != regions.len()
                    || matrix.iter().any(|row| row.len() != regions.len())
                {
                    return Err(NetError::Config("latency matrix must be square over the regions".into()));
                }
                matrix.iter().flatten().try_for_each(Delay::validate)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulated,
    Sockets,
    Proxy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Peer {
    pub index: u16,
    pub address: String,
}

/// Start-up configuration of one node's network layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub self_index: u16,
    pub peers: Vec<Peer>,
    pub mode: Mode,
    /// Only read by the simulated backend.
    #[serde(default = "no_latency")]
    pub latency: LatencyModel,
    #[serde(default)]
    pub tob_enabled: bool,
    /// Sequencer ordering delay of the simulated TOB backend.
    #[serde(default)]
    pub tob_latency_ms: f64,
    #[serde(default)]
    pub auth_enabled: bool,
    /// RPC listen address of this node.
    #[serde(default = "default_rpc")]
    pub rpc_listen: String,
}

fn no_latency() -> LatencyModel {
    LatencyModel::constant(0.0)
}

fn default_rpc() -> String {
    "127.0.0.1:7000".into()
}

impl NetConfig {
    pub fn n(&self) -> u16 {
        self.peers.len() as u16
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let mut idx: Vec<u16> = self.peers.iter().map(|p| p.index).collect();
        idx.sort_unstable();
        if idx.is_empty() || idx.iter().enumerate().any(|(k, i)| *i as usize != k + 1) {
            return Err(NetError::Config("peer indices must be exactly 1..n".into()));
        }
        if !idx.contains(&self.self_index) {
            return Err(NetError::Config(format!("self index {} is not a peer", self.self_index)));
        }
        if !(self.tob_latency_ms.is_finite() && self.tob_latency_ms >= 0.0) {
            return Err(NetError::Config("tob_latency_ms must be non-negative".into()));
        }
        self.latency.validate()
    }

    pub fn address_of(&self, index: u16) -> Result<&str, NetError> {
        self.peers
            .iter()
            .find(|p| p.index == index)
            .map(|p| p.address.as_str())
            .ok_or(NetError::UnknownPeer(index))
    }

    pub fn from_json(s: &str) -> Result<Self, NetError> {
        let c: NetConfig = serde_json::from_str(s).map_err(|e| NetError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        let s = std::fs::read_to_string(path).map_err(|e| NetError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}

/// Named deployment shape: size, threshold, latency and the top of the
/// benchmark rate ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub n: u16,
    pub t: u16,
    pub max_rate: u32,
    pub tob_latency_ms: f64,
    pub latency: LatencyModel,
}

const PRESETS: [(&str, &str); 7] = [
    ("local-4", include_str!("../presets/local-4.json")),
    ("local-7", include_str!("../presets/local-7.json")),
    ("global-7", include_str!("../presets/global-7.json")),
    ("local-31", include_str!("../presets/local-31.json")),
    ("global-31", include_str!("../presets/global-31.json")),
    ("local-127", include_str!("../presets/local-127.json")),
    ("global-127", include_str!("../presets/global-127.json")),
];

impl Preset {
    pub fn names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    pub fn named(name: &str) -> Result<Self, NetError> {
        let (_, json) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| NetError::Config(format!("unknown preset {name}")))?;
        let p: Preset = serde_json::from_str(json).map_err(|e| NetError::Config(e.to_string()))?;
        p.latency.validate()?;
        Ok(p)
    }

    /// Socket configuration for node `self_index`, peers on consecutive
    /// loopback ports from `base_port`.
    pub fn net_config(&self, self_index: u16, base_port: u16, mode: Mode) -> NetConfig {
        NetConfig {
            self_index,
            peers: (1..=self.n)
                .map(|i| Peer {
                    index: i,
                    address: format!("127.0.0.1:{}", base_port + i),
                })
                .collect(),
            mode,
            latency: self.latency.clone(),
            tob_enabled: false,
            tob_latency_ms: self.tob_latency_ms,
            auth_enabled: false,
            rpc_listen: format!("127.0.0.1:{}", base_port + 1000 + self_index),
        }
    }
}
