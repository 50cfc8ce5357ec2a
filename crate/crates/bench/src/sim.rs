//! In-process cluster on the discrete-event network. Every node runs a real
//! instance manager; the simulator supplies virtual time, link delays and
//! a per-operation compute cost. A node handles one event at a time, so
//! work queues up behind a busy node exactly as it would behind a busy CPU.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use tcs_core::{
    InstanceId, InstanceManager, KeyStore, ManagerConfig, ManualClock, NullSink, PollResult, ProtocolMessage, Step,
};
use tcs_network::{Delivery, Preset, SimConfig, SimNetwork};
use tcs_schemes::{api, DealOptions, KeyShare, PublicKeyMaterial, Request, SchemeId, SchemeKind, ThresholdParams};

use crate::error::BenchError;
use crate::plan::{CostModel, ExperimentPlan};
use crate::samples::{LatencySample, RunResult};

/// Timer token that resumes a node after it finished its current work.
const WAKE: u64 = u64::MAX;

/// Dealt keys of one scheme.
#[derive(Clone, Debug)]
pub struct SchemeKeys {
    pub public: PublicKeyMaterial,
    pub shares: Vec<KeyShare>,
}

fn derive_seed(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_be_bytes());
        h.update(p);
    }
    h.finalize().into()
}

/// Deals test-size keys for `scheme` deterministically from the plan seed.
pub fn deal_for(scheme: SchemeId, n: u16, t: u16, seed: u64) -> Result<SchemeKeys, BenchError> {
    let s = derive_seed(&[b"tcs/bench/keys", scheme.as_str().as_bytes(), &seed.to_be_bytes()]);
    let (public, shares) = api::deal_keys_seeded(scheme, ThresholdParams::new(n, t)?, &DealOptions::test(), s)?;
    Ok(SchemeKeys { public, shares })
}

/// Parameters of a single simulated run.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub scheme: SchemeId,
    pub rate: u32,
    pub duration_s: f64,
    pub payload_size: usize,
    pub seed: u64,
    pub precompute: bool,
    pub tob: bool,
    pub cost: CostModel,
    pub crashed: Vec<u16>,
    pub grace: f64,
}

impl RunSpec {
    pub fn from_plan(plan: &ExperimentPlan, scheme: SchemeId, rate: u32) -> Self {
        RunSpec {
            scheme,
            rate,
            duration_s: plan.duration_s,
            payload_size: plan.payload_size,
            seed: plan.seed,
            precompute: plan.precompute,
            tob: plan.tob,
            cost: plan.cost(scheme),
            crashed: plan.crashed.clone(),
            grace: plan.grace,
        }
    }

    /// Open-loop request count: one every `1/rate` seconds for the whole
    /// duration.
    pub fn request_count(&self) -> usize {
        (self.rate as f64 * self.duration_s).round() as usize
    }
}

enum Job {
    Request(usize),
    Message(ProtocolMessage),
}

#[derive(Default)]
struct NodeState {
    busy_until: Duration,
    queue: VecDeque<Job>,
    wake_pending: bool,
    done: Vec<bool>,
}

struct Run<'a> {
    spec: &'a RunSpec,
    key_id: String,
    clock: Arc<ManualClock>,
    managers: Vec<InstanceManager>,
    nodes: Vec<NodeState>,
    net: SimNetwork,
    requests: Vec<Request>,
    ids: HashMap<InstanceId, usize>,
    start: Duration,
    interval: f64,
    samples: Vec<LatencySample>,
    failed: usize,
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

pub(crate) fn requests_for(spec: &RunSpec, pk: &PublicKeyMaterial) -> Result<Vec<Request>, BenchError> {
    let mut rng = ChaCha20Rng::from_seed(derive_seed(&[
        b"tcs/bench/requests",
        spec.scheme.as_str().as_bytes(),
        &spec.rate.to_be_bytes(),
        &spec.seed.to_be_bytes(),
    ]));
    (0..spec.request_count())
        .map(|i| {
            // The index prefix keeps instance ids distinct.
            let mut payload = vec![0u8; spec.payload_size.max(8)];
            rng.fill(&mut payload[..]);
            payload[..8].copy_from_slice(&(i as u64).to_be_bytes());
            Ok(match spec.scheme.kind() {
                SchemeKind::Cipher => Request::Decrypt(api::encrypt(pk, b"bench", &payload, &mut rng)?),
                SchemeKind::Signature => Request::Sign(payload),
                SchemeKind::Randomness => Request::Coin(payload),
            })
        })
        .collect()
}

/// Runs one (scheme, rate) point on a fresh cluster.
pub fn run_point(preset: &Preset, latency: Option<&tcs_network::LatencyModel>, keys: &SchemeKeys, spec: &RunSpec) -> Result<RunResult, BenchError> {
    let n = preset.n;
    let t = keys.public.params.t;
    if keys.public.params.n != n {
        return Err(BenchError::Plan(format!(
            "keys dealt for {} parties, preset {} has {n}",
            keys.public.params.n, preset.name
        )));
    }
    let key_id = KeyStore::default_key_id(spec.scheme);
    let clock = Arc::new(ManualClock::new());
    let live: Vec<u16> = (1..=n).filter(|i| !spec.crashed.contains(i)).collect();
    let retention = Duration::from_secs_f64(spec.duration_s * (2.0 + spec.grace) + 60.0);
    let mut managers = Vec::new();
    for share in &keys.shares {
        let mut store = KeyStore::new();
        store.insert(key_id.clone(), share.clone())?;
        let config = ManagerConfig {
            tob_enabled: spec.tob,
            retention,
            max_retained: usize::MAX,
            live_parties: Some(live.clone()),
            seed: derive_seed(&[b"tcs/bench/node", &share.index.to_be_bytes(), &spec.seed.to_be_bytes()]),
            ..ManagerConfig::default()
        };
        managers.push(InstanceManager::new(
            share.index,
            store,
            config,
            clock.clone(),
            Arc::new(NullSink),
        )?);
    }
    let mut sim = SimConfig::new(n, latency.cloned().unwrap_or_else(|| preset.latency.clone()), spec.seed ^ ((spec.rate as u64) << 32));
    sim.tob_enabled = spec.tob;
    sim.tob_latency = Duration::from_secs_f64(preset.tob_latency_ms / 1e3);
    let mut net = SimNetwork::new(sim)?;
    for c in &spec.crashed {
        net.crash(*c);
    }
    let requests = requests_for(spec, &keys.public)?;
    let ids = requests
        .iter()
        .enumerate()
        .map(|(i, r)| (InstanceId::derive(spec.scheme, &key_id, r), i))
        .collect();
    let count = requests.len();
    let mut run = Run {
        spec,
        key_id,
        clock,
        managers,
        nodes: (0..n)
            .map(|_| NodeState {
                done: vec![false; count],
                ..NodeState::default()
            })
            .collect(),
        net,
        requests,
        ids,
        start: Duration::ZERO,
        interval: 1.0 / spec.rate.max(1) as f64,
        samples: Vec::new(),
        failed: 0,
    };
    run.execute()?;
    Ok(RunResult {
        scheme: spec.scheme,
        rate: spec.rate,
        n,
        t,
        duration_s: spec.duration_s,
        submitted: count,
        failed: run.failed,
        samples: run.samples,
        partial: None,
    })
}

impl Run<'_> {
    fn arrival(&self, k: usize) -> Duration {
        self.start + Duration::from_secs_f64(k as f64 * self.interval)
    }

    fn execute(&mut self) -> Result<(), BenchError> {
        if self.spec.precompute && self.spec.scheme == SchemeId::Kg20 {
            self.precompute()?;
        }
        if self.requests.is_empty() {
            return Ok(());
        }
        let cutoff = self.start + Duration::from_secs_f64(self.spec.duration_s * (1.0 + self.spec.grace));
        for node in 1..=self.managers.len() as u16 {
            self.net.schedule_timer(self.arrival(0), node, 0);
        }
        while let Some(at) = self.net.peek_time() {
            if at > cutoff {
                break;
            }
            let Some((now, d)) = self.net.next_delivery() else { break };
            if now > cutoff {
                break;
            }
            match d {
                Delivery::Timer { node, token: WAKE } => {
                    let st = &mut self.nodes[node as usize - 1];
                    st.wake_pending = false;
                    if let Some(job) = st.queue.pop_front() {
                        self.process(node, job, now)?;
                    }
                    self.rearm(node, now);
                }
                Delivery::Timer { node, token } => {
                    let k = token as usize;
                    if k + 1 < self.requests.len() {
                        self.net.schedule_timer(self.arrival(k + 1), node, token + 1);
                    }
                    self.arrive(node, Job::Request(k), now)?;
                }
                Delivery::Message { to, message, .. } => self.arrive(to, Job::Message(message), now)?,
            }
        }
        Ok(())
    }

    /// Runs the nonce exchange to completion before any request, and
    /// starts the clock of the experiment after it.
    fn precompute(&mut self) -> Result<(), BenchError> {
        let k = self.requests.len() + 1;
        for i in 0..self.managers.len() {
            let node = i as u16 + 1;
            if self.net.is_crashed(node) {
                continue;
            }
            self.clock.set(self.net.now());
            let step = self.managers[i].precompute(&self.key_id, k)?;
            self.send(node, step, self.net.now())?;
        }
        while let Some((now, d)) = self.net.next_delivery() {
            if let Delivery::Message { to, message, .. } = d {
                self.clock.set(now);
                let step = self.managers[to as usize - 1].dispatch_incoming(&message);
                self.send(to, step, now)?;
            }
        }
        self.start = self.net.now() + Duration::from_millis(1);
        Ok(())
    }

    fn arrive(&mut self, node: u16, job: Job, now: Duration) -> Result<(), BenchError> {
        let st = &mut self.nodes[node as usize - 1];
        if st.busy_until > now || !st.queue.is_empty() {
            st.queue.push_back(job);
            self.rearm(node, now);
            return Ok(());
        }
        self.process(node, job, now)
    }

    fn rearm(&mut self, node: u16, now: Duration) {
        let st = &mut self.nodes[node as usize - 1];
        if !st.wake_pending && !st.queue.is_empty() {
            st.wake_pending = true;
            let at = st.busy_until.max(now);
            self.net.schedule_timer(at, node, WAKE);
        }
    }

    fn process(&mut self, node: u16, job: Job, now: Duration) -> Result<(), BenchError> {
        let i = node as usize - 1;
        self.clock.set(now);
        let (id, step) = match job {
            Job::Request(k) => {
                let r = self.requests[k].clone();
                match self.managers[i].start_instance(self.spec.scheme, &self.key_id, r) {
                    Ok((id, step)) => (id, step),
                    Err(_) => {
                        self.failed += 1;
                        return Ok(());
                    }
                }
            }
            Job::Message(m) => {
                let id = m.instance_id;
                (id, self.managers[i].dispatch_incoming(&m))
            }
        };
        let cost = Duration::from_secs_f64(self.spec.cost.cost_ms(&step.work) / 1e3);
        let done = now + cost;
        self.nodes[i].busy_until = done;
        self.send(node, step, done)?;

        if let Some(&k) = self.ids.get(&id) {
            if !self.nodes[i].done[k] {
                match self.managers[i].poll_result(&id) {
                    PollResult::Finished(_) => {
                        self.nodes[i].done[k] = true;
                        self.samples.push(LatencySample {
                            request: k as u32,
                            node,
                            t_received: secs(self.arrival(k) - self.start),
                            t_finalized: secs(done - self.start),
                        });
                    }
                    PollResult::Failed(_) => {
                        self.nodes[i].done[k] = true;
                        self.failed += 1;
                    }
                    PollResult::Pending | PollResult::Unknown => {}
                }
            }
        }
        Ok(())
    }

    fn send(&mut self, node: u16, step: Step, depart: Duration) -> Result<(), BenchError> {
        for m in &step.outgoing {
            self.net.send(depart, node, m)?;
        }
        Ok(())
    }
}

/// Runs every (scheme, rate) of a plan on simulated clusters, restarting
/// the cluster for each point. Keys are dealt once per scheme.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<RunResult>, BenchError> {
    plan.validate()?;
    let preset = plan.preset()?;
    let mut runs = Vec::new();
    for &scheme in &plan.schemes {
        let keys = deal_for(scheme, preset.n, preset.t, plan.seed)?;
        for rate in plan.ladder()? {
            let spec = RunSpec::from_plan(plan, scheme, rate);
            runs.push(run_point(&preset, plan.latency.as_ref(), &keys, &spec)?);
        }
    }
    Ok(runs)
}
