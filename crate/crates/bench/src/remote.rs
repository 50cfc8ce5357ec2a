//! Open-loop load against running nodes over their RPC interface.
//!
//! Each node receives the same request stream, one submission every
//! `1/rate` seconds regardless of how earlier ones fare. Results are
//! polled while the load runs, well inside the nodes' retention window. Latency is the
//! node's own measurement from instance start to termination, reported by
//! `protocol.poll`, so client clock skew does not enter the samples.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use tcs_core::KeyStore;
use tcs_schemes::{PublicKeyMaterial, Request};
use tcs_service::{PollStatus, RpcClient};
use tokio::sync::mpsc;

use crate::error::BenchError;
use crate::plan::ExperimentPlan;
use crate::samples::{LatencySample, RunResult};
use crate::sim::{requests_for, RunSpec};

const CONNECT_TIMEOUT: Duration = Duration::from_secs(10);
const POLL_INTERVAL: Duration = Duration::from_millis(20);

fn unreachable(node: usize, addr: SocketAddr, e: impl std::fmt::Display) -> String {
    format!("node {node} at {addr}: {e}")
}

async fn connect_all(addrs: &[SocketAddr]) -> Result<Vec<RpcClient>, BenchError> {
    let mut out = Vec::new();
    for (i, a) in addrs.iter().enumerate() {
        let c = RpcClient::connect_ready(*a, CONNECT_TIMEOUT)
            .await
            .map_err(|e| BenchError::Unreachable(unreachable(i + 1, *a, e)))?;
        out.push(c);
    }
    Ok(out)
}

type Submission = (usize, f64);

/// Submits what the pacer hands over and passes the instance ids on to
/// the poller.
async fn submitter(
    mut client: RpcClient,
    scheme: tcs_schemes::SchemeId,
    requests: Arc<Vec<Request>>,
    mut rx: mpsc::UnboundedReceiver<Submission>,
    tx: mpsc::UnboundedSender<(usize, f64, String)>,
) -> Result<(), String> {
    while let Some((k, sent)) = rx.recv().await {
        let id = client
            .submit(scheme, None, requests[k].clone())
            .await
            .map_err(|e| e.to_string())?;
        let _ = tx.send((k, sent, id));
    }
    Ok(())
}

#[derive(Default)]
struct Collected {
    samples: Vec<LatencySample>,
    failed: usize,
    error: Option<String>,
}

/// Polls outstanding instances of one node until all terminated or the
/// deadline passed.
async fn poller(
    mut client: RpcClient,
    node: u16,
    mut rx: mpsc::UnboundedReceiver<(usize, f64, String)>,
    deadline: Instant,
) -> Collected {
    let mut out = Collected::default();
    let mut pending: Vec<(usize, f64, String)> = Vec::new();
    let mut open = true;
    loop {
        while let Ok(s) = rx.try_recv() {
            pending.push(s);
        }
        if open && rx.is_closed() && rx.is_empty() {
            open = false;
        }
        let mut still = Vec::new();
        for (k, sent, id) in pending.drain(..) {
            let r = match client.poll(&id).await {
                Ok(r) => r,
                Err(e) => {
                    out.error = Some(e.to_string());
                    return out;
                }
            };
            match (r.status, r.latency_s) {
                (PollStatus::Finished, Some(l)) => out.samples.push(LatencySample {
                    request: k as u32,
                    node,
                    t_received: sent,
                    t_finalized: sent + l,
                }),
                (PollStatus::Failed, _) => out.failed += 1,
                _ => still.push((k, sent, id)),
            }
        }
        pending = still;
        if (!open && pending.is_empty()) || Instant::now() >= deadline {
            return out;
        }
        tokio::time::sleep(POLL_INTERVAL).await;
    }
}

/// One (scheme, rate) point. A single pacer releases request `k` to every
/// node at `k / rate` seconds; per-node submitters and pollers run
/// concurrently with it. A node that stops answering ends its share of
/// the point early and marks the result partial.
pub async fn run_point_remote(
    addrs: &[SocketAddr],
    n: u16,
    t: u16,
    public: &PublicKeyMaterial,
    spec: &RunSpec,
) -> Result<RunResult, BenchError> {
    let requests = Arc::new(requests_for(spec, public)?);
    let submit_clients = connect_all(addrs).await?;
    let poll_clients = connect_all(addrs).await?;
    let t0 = Instant::now() + Duration::from_millis(50);
    let deadline = t0 + Duration::from_secs_f64(spec.duration_s * (1.0 + spec.grace));

    let mut pace = Vec::new();
    let mut submitters = Vec::new();
    let mut pollers = Vec::new();
    for (i, (sc, pc)) in submit_clients.into_iter().zip(poll_clients).enumerate() {
        let (stx, srx) = mpsc::unbounded_channel();
        let (ptx, prx) = mpsc::unbounded_channel();
        pace.push(stx);
        submitters.push(tokio::spawn(submitter(sc, spec.scheme, requests.clone(), srx, ptx)));
        pollers.push(tokio::spawn(poller(pc, i as u16 + 1, prx, deadline)));
    }

    let interval = 1.0 / spec.rate.max(1) as f64;
    for k in 0..requests.len() {
        tokio::time::sleep_until((t0 + Duration::from_secs_f64(k as f64 * interval)).into()).await;
        let sent = t0.elapsed().as_secs_f64();
        for tx in &pace {
            let _ = tx.send((k, sent));
        }
    }
    drop(pace);

    let mut partial = None;
    for (i, s) in submitters.into_iter().enumerate() {
        if let Err(e) = s.await.map_err(|e| e.to_string()).and_then(|r| r) {
            partial.get_or_insert_with(|| unreachable(i + 1, addrs[i], e));
        }
    }
    let mut samples = Vec::new();
    let mut failed = 0;
    for (i, p) in pollers.into_iter().enumerate() {
        let c = p.await.map_err(|e| BenchError::Plan(e.to_string()))?;
        if let Some(e) = c.error {
            partial.get_or_insert_with(|| unreachable(i + 1, addrs[i], e));
        }
        samples.extend(c.samples);
        failed += c.failed;
    }
    samples.sort_by_key(|s| (s.request, s.node));
    Ok(RunResult {
        scheme: spec.scheme,
        rate: spec.rate,
        n,
        t,
        duration_s: spec.duration_s,
        submitted: requests.len(),
        failed,
        samples,
        partial,
    })
}

/// Runs the whole ladder against `plan.nodes`. Stops after the first
/// partial point, since later points would run against the same fault.
pub async fn run_plan_remote(plan: &ExperimentPlan) -> Result<Vec<RunResult>, BenchError> {
    plan.validate()?;
    let preset = plan.preset()?;
    let addrs = plan
        .nodes
        .iter()
        .map(|a| a.parse::<SocketAddr>().map_err(|e| BenchError::Plan(format!("node address {a}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if addrs.len() != preset.n as usize {
        return Err(BenchError::Plan(format!(
            "{} node addresses for a {}-party preset",
            addrs.len(),
            preset.n
        )));
    }
    let mut runs = Vec::new();
    for &scheme in &plan.schemes {
        let key_id = KeyStore::default_key_id(scheme);
        let mut c = connect_all(&addrs[..1]).await?.remove(0);
        let public = c
            .public_key(&key_id)
            .await
            .map_err(|e| BenchError::Plan(format!("public key {key_id}: {e}")))?;
        if (public.params.n, public.params.t) != (preset.n, preset.t) {
            return Err(BenchError::Plan(format!(
                "key {key_id} is {}-of-{}, preset {} expects t={} n={}",
                public.params.t, public.params.n, preset.name, preset.t, preset.n
            )));
        }
        for rate in plan.ladder()? {
            let spec = RunSpec::from_plan(plan, scheme, rate);
            let run = run_point_remote(&addrs, preset.n, preset.t, &public, &spec).await?;
            let stop = run.partial.is_some();
            runs.push(run);
            if stop {
                return Ok(runs);
            }
        }
    }
    Ok(runs)
}
