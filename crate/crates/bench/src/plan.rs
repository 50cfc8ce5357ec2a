//! Experiment plans.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tcs_network::{LatencyModel, Preset};
use tcs_schemes::SchemeId;

use crate::error::BenchError;

pub const PAYLOAD_SIZES: [usize; 3] = [256, 1024, 4096];
pub const CAPACITY_DURATION_S: f64 = 60.0;
pub const STEADY_DURATION_S: f64 = 300.0;

/// Virtual CPU time charged per cryptographic operation, in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub share_ms: f64,
    pub verify_ms: f64,
    pub combine_ms: f64,
}

impl CostModel {
    pub fn cost_ms(&self, w: &tcs_core::Work) -> f64 {
        w.shares as f64 * self.share_ms + w.verifications as f64 * self.verify_ms + w.combines as f64 * self.combine_ms
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Deployment preset name, e.g. `global-31`.
    pub preset: String,
    pub schemes: Vec<SchemeId>,
    /// Explicit ladder; by default doubling from 1 to the preset's maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rate: Option<u32>,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_payload")]
    pub payload_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Precompute KG20 nonces before injecting requests.
    #[serde(default)]
    pub precompute: bool,
    /// Route FROST commitments through total-order broadcast.
    #[serde(default)]
    pub tob: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub compute: BTreeMap<SchemeId, CostModel>,
    /// Replaces the preset's latency model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencyModel>,
    /// Nodes silenced for the whole run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crashed: Vec<u16>,
    #[serde(default = "default_grace")]
    pub grace: f64,
    /// L95 bound, relative to the knee, for the usable capacity.
    #[serde(default = "default_usable")]
    pub usable_factor: f64,
    /// RPC addresses of running nodes; empty means a simulated cluster.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<String>,
}

fn default_duration() -> f64 {
    CAPACITY_DURATION_S
}

fn default_payload() -> usize {
    256
}

fn default_grace() -> f64 {
    0.1
}

fn default_usable() -> f64 {
    5.0
}

impl ExperimentPlan {
    pub fn new(preset: &str, schemes: Vec<SchemeId>) -> Self {
        ExperimentPlan {
            preset: preset.to_string(),
            schemes,
            rates: None,
            max_rate: None,
            duration_s: CAPACITY_DURATION_S,
            payload_size: 256,
            seed: 0,
            precompute: false,
            tob: false,
            compute: BTreeMap::new(),
            latency: None,
            crashed: Vec::new(),
            grace: 0.1,
            usable_factor: 5.0,
            nodes: Vec::new(),
        }
    }

    pub fn preset(&self) -> Result<Preset, BenchError> {
        Ok(Preset::named(&self.preset)?)
    }

    /// The request rates of the capacity test.
    pub fn ladder(&self) -> Result<Vec<u32>, BenchError> {
        if let Some(r) = &self.rates {
            return Ok(r.clone());
        }
        let max = match self.max_rate {
            Some(m) => m,
            None => self.preset()?.max_rate,
        };
        Ok(std::iter::successors(Some(1u32), |r| r.checked_mul(2))
            .take_while(|r| *r <= max)
            .collect())
    }

    pub fn cost(&self, scheme: SchemeId) -> CostModel {
        self.compute.get(&scheme).copied().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Plan(m));
        if self.schemes.is_empty() {
            return bad("no schemes".into());
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration {} must be positive", self.duration_s));
        }
        if !PAYLOAD_SIZES.contains(&self.payload_size) {
            return bad(format!("payload size {} not in {:?}", self.payload_size, PAYLOAD_SIZES));
        }
        if !(0.0..=1.0).contains(&self.grace) {
            return bad(format!("grace {} outside [0, 1]", self.grace));
        }
        if self.usable_factor < 1.0 {
            return bad(format!("usable factor {} below 1", self.usable_factor));
        }
        let ladder = self.ladder()?;
        if ladder.is_empty() || ladder[0] == 0 {
            return bad("empty rate ladder".into());
        }
        if ladder.windows(2).any(|w| w[1] != 2 * w[0]) {
            return bad(format!("rates {ladder:?} are not strictly doubling"));
        }
        if self.nodes.is_empty() {
            let preset = self.preset()?;
            if let Some(l) = &self.latency {
                l.validate()?;
            }
            if let Some(c) = self.crashed.iter().find(|c| **c == 0 || **c > preset.n) {
                return bad(format!("crashed node {c} outside 1..={}", preset.n));
            }
        }
        for (s, c) in &self.compute {
            if [c.share_ms, c.verify_ms, c.combine_ms].iter().any(|x| !(*x >= 0.0)) {
                return bad(format!("negative cost for {s}"));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, BenchError> {
        let p: Self = serde_json::from_str(s).map_err(|e| BenchError::Plan(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let s = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}
