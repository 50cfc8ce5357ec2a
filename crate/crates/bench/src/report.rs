//! Turning raw samples into a metrics report.

use serde::{Deserialize, Serialize};
use tcs_schemes::SchemeId;

use crate::error::BenchError;
use crate::metrics::{
    knee_capacity, latency_fairness_index, percentiles, residual_delay_factor, theta, throughput, usable_capacity,
    CurvePoint,
};
use crate::samples::RunResult;

/// Percentiles of a single node's samples, in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeScope {
    pub node: u16,
    pub samples: usize,
    pub l50: f64,
    pub l_theta: f64,
    pub l95: f64,
}

/// Metrics of one (scheme, rate) run. Latencies are in seconds and absent
/// when nothing finished.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scheme: SchemeId,
    pub rate: u32,
    pub submitted: usize,
    pub completed: usize,
    pub failed: usize,
    pub throughput: f64,
    /// Network scope: percentiles over the pooled samples of all nodes.
    pub l50: Option<f64>,
    pub l_theta: Option<f64>,
    pub l95: Option<f64>,
    /// From the distribution of per-node L95 values.
    pub delta_res: Option<f64>,
    pub eta_theta: Option<f64>,
    pub nodes: Vec<NodeScope>,
    pub partial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    pub scheme: SchemeId,
    pub knee: f64,
    pub usable: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub preset: String,
    pub n: u16,
    pub t: u16,
    pub theta: f64,
    pub rows: Vec<MetricsRow>,
    pub capacities: Vec<Capacity>,
}

pub fn analyze_run(run: &RunResult, grace: f64) -> Result<MetricsRow, BenchError> {
    let th = theta(run.n, run.t);
    let completions = run.completions();
    let unfinished = run.submitted.saturating_sub(completions.len());
    let tp = throughput(&completions, run.duration_s, unfinished, grace);

    let pooled: Vec<f64> = run.samples.iter().map(|s| s.latency()).collect();
    let (l50, l_theta, l95) = if pooled.is_empty() {
        (None, None, None)
    } else {
        let p = percentiles(&pooled, &[50.0, th, 95.0])?;
        (Some(p[0]), Some(p[1]), Some(p[2]))
    };

    let mut per_node: std::collections::BTreeMap<u16, Vec<f64>> = Default::default();
    for s in &run.samples {
        per_node.entry(s.node).or_default().push(s.latency());
    }
    let mut nodes = Vec::new();
    for (node, lat) in &per_node {
        let p = percentiles(lat, &[50.0, th, 95.0])?;
        nodes.push(NodeScope {
            node: *node,
            samples: lat.len(),
            l50: p[0],
            l_theta: p[1],
            l95: p[2],
        });
    }
    let (delta_res, eta_theta) = if nodes.is_empty() {
        (None, None)
    } else {
        let node_l95: Vec<f64> = nodes.iter().map(|n| n.l95).collect();
        let p = percentiles(&node_l95, &[th, 95.0])?;
        match (residual_delay_factor(p[1], p[0]), latency_fairness_index(p[0], p[1])) {
            (Ok(d), Ok(e)) => (Some(d), Some(e)),
            _ => (None, None),
        }
    };
    Ok(MetricsRow {
        scheme: run.scheme,
        rate: run.rate,
        submitted: run.submitted,
        completed: completions.len(),
        failed: run.failed,
        throughput: tp,
        l50,
        l_theta,
        l95,
        delta_res,
        eta_theta,
        nodes,
        partial: run.partial.is_some(),
    })
}

/// Builds the report for runs of one deployment. Rows keep the order of
/// `runs`; capacities follow the order in which schemes first appear.
pub fn build_report(
    preset: &str,
    runs: &[RunResult],
    grace: f64,
    usable_factor: f64,
) -> Result<MetricsReport, BenchError> {
    let (n, t) = runs
        .first()
        .map(|r| (r.n, r.t))
        .ok_or_else(|| BenchError::Metrics("no runs".into()))?;
    if runs.iter().any(|r| (r.n, r.t) != (n, t)) {
        return Err(BenchError::Metrics("runs mix deployments".into()));
    }
    let rows = runs.iter().map(|r| analyze_run(r, grace)).collect::<Result<Vec<_>, _>>()?;
    let mut schemes: Vec<SchemeId> = Vec::new();
    for r in &rows {
        if !schemes.contains(&r.scheme) {
            schemes.push(r.scheme);
        }
    }
    let mut capacities = Vec::new();
    for s in schemes {
        let curve: Vec<CurvePoint> = rows
            .iter()
            .filter(|r| r.scheme == s)
            .map(|r| CurvePoint {
                rate: r.rate as f64,
                throughput: r.throughput,
                l95: r.l95.unwrap_or(f64::INFINITY),
            })
            .collect();
        capacities.push(Capacity {
            scheme: s,
            knee: knee_capacity(&curve)?,
            usable: usable_capacity(&curve, usable_factor)?,
        });
    }
    Ok(MetricsReport {
        preset: preset.to_string(),
        n,
        t,
        theta: theta(n, t),
        rows,
        capacities,
    })
}
