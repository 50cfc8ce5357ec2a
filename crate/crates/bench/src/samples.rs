//! Raw latency samples of one experiment and their on-disk form.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tcs_schemes::SchemeId;

use crate::error::BenchError;

/// One node's handling of one request, in seconds from the start of the
/// experiment, measured on the server side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, u16, f64, f64)", into = "(u32, u16, f64, f64)")]
pub struct LatencySample {
    pub request: u32,
    pub node: u16,
    pub t_received: f64,
    pub t_finalized: f64,
}

impl LatencySample {
    pub fn latency(&self) -> f64 {
        (self.t_finalized - self.t_received).max(0.0)
    }
}

impl From<(u32, u16, f64, f64)> for LatencySample {
    fn from((request, node, t_received, t_finalized): (u32, u16, f64, f64)) -> Self {
        LatencySample {
            request,
            node,
            t_received,
            t_finalized,
        }
    }
}

impl From<LatencySample> for (u32, u16, f64, f64) {
    fn from(s: LatencySample) -> Self {
        (s.request, s.node, s.t_received, s.t_finalized)
    }
}

/// Everything collected at one ladder rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scheme: SchemeId,
    pub rate: u32,
    pub n: u16,
    pub t: u16,
    pub duration_s: f64,
    pub submitted: usize,
    /// Instances that terminated with an error, summed over nodes.
    #[serde(default)]
    pub failed: usize,
    pub samples: Vec<LatencySample>,
    /// Set when the run was cut short; the samples are what was gathered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<String>,
}

impl RunResult {
    /// Earliest finalization of each request that finished anywhere.
    pub fn completions(&self) -> Vec<f64> {
        let mut first = std::collections::BTreeMap::new();
        for s in &self.samples {
            let e = first.entry(s.request).or_insert(s.t_finalized);
            if s.t_finalized < *e {
                *e = s.t_finalized;
            }
        }
        first.into_values().collect()
    }

    /// Requests finalized by at least `quorum` nodes.
    pub fn finalized_by(&self, quorum: usize) -> usize {
        let mut count = std::collections::BTreeMap::<u32, usize>::new();
        for s in &self.samples {
            *count.entry(s.request).or_default() += 1;
        }
        count.values().filter(|c| **c >= quorum).count()
    }
}

/// A set of runs stored for later metric replay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub preset: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub runs: Vec<RunResult>,
}

impl Recording {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let s = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        serde_json::from_str(&s).map_err(|e| BenchError::Plan(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), BenchError> {
        let body = serde_json::to_string(self).expect("recording serializes");
        std::fs::write(path, body + "\n").map_err(|e| BenchError::io(path, e))
    }
}
