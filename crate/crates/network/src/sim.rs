//! Discrete-event network simulator with virtual time.
//!
//! The simulator only moves bytes: the caller pops deliveries, hands them to
//! its nodes and sends whatever the nodes produce. Events are ordered by
//! (time, insertion sequence), and all randomness comes from one seeded
//! generator, so a run is reproducible from its seed and workload.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tcs_core::{Channel, ProtocolMessage};

use crate::config::LatencyModel;
use crate::envelope::{AuthKeys, Envelope, EnvelopeKind};
use crate::error::NetError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dest {
    Party(u16),
    /// Every party except the sender.
    All,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub n: u16,
    pub latency: LatencyModel,
    pub tob_enabled: bool,
    pub tob_latency: Duration,
    pub seed: u64,
    pub auth: Option<Vec<AuthKeys>>,
    /// Probability that a point-to-point send is lost.
    pub drop_prob: f64,
    /// Probability that a point-to-point send arrives twice.
    pub duplicate_prob: f64,
}

impl SimConfig {
    pub fn new(n: u16, latency: LatencyModel, seed: u64) -> Self {
        SimConfig {
            n,
            latency,
            tob_enabled: false,
            tob_latency: Duration::ZERO,
            seed,
            auth: None,
            drop_prob: 0.0,
            duplicate_prob: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delivery {
    Message { to: u16, from: u16, message: ProtocolMessage },
    Timer { node: u16, token: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NetStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped_crashed: u64,
    pub dropped_lossy: u64,
    pub duplicated: u64,
    pub auth_failures: u64,
    pub undecodable: u64,
    pub tob_broadcasts: u64,
}

/// One delivered message, for determinism checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub at: Duration,
    pub to: u16,
    pub from: u16,
    pub channel: Channel,
    pub wire: Vec<u8>,
}

#[derive(Debug)]
enum Item {
    Envelope { to: u16, bytes: Vec<u8> },
    Deferred(Delivery),
}

#[derive(Debug)]
struct Scheduled {
    at: Duration,
    seq: u64,
    item: Item,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

pub struct SimNetwork {
    config: SimConfig,
    rng: ChaCha20Rng,
    now: Duration,
    seq: u64,
    heap: BinaryHeap<Reverse<Scheduled>>,
    crashed: BTreeSet<u16>,
    /// Last TOB delivery time per node; keeps per-node delivery monotone.
    tob_last: Vec<Duration>,
    stats: NetStats,
    trace: Option<Vec<TraceEntry>>,
}

impl SimNetwork {
    pub fn new(config: SimConfig) -> Result<Self, NetError> {
        config.latency.validate()?;
        if let Some(keys) = &config.auth {
            if keys.len() != config.n as usize {
                return Err(NetError::Config("one set of MAC keys per party".into()));
            }
        }
        Ok(SimNetwork {
            rng: ChaCha20Rng::seed_from_u64(config.seed),
            tob_last: vec![Duration::ZERO; config.n as usize + 1],
            config,
            now: Duration::ZERO,
            seq: 0,
            heap: BinaryHeap::new(),
            crashed: BTreeSet::new(),
            stats: NetStats::default(),
            trace: None,
        })
    }

    pub fn n(&self) -> u16 {
        self.config.n
    }

    pub fn now(&self) -> Duration {
        self.now
    }

    pub fn stats(&self) -> NetStats {
        self.stats
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> &[TraceEntry] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Silences a node: it neither sends nor receives from now on.
    pub fn crash(&mut self, node: u16) {
        self.crashed.insert(node);
    }

    pub fn recover(&mut self, node: u16) {
        self.crashed.remove(&node);
    }

    pub fn is_crashed(&self, node: u16) -> bool {
        self.crashed.contains(&node)
    }

    fn check(&self, node: u16) -> Result<(), NetError> {
        if node == 0 || node > self.config.n {
            return Err(NetError::UnknownPeer(node));
        }
        Ok(())
    }

    fn push(&mut self, at: Duration, item: Item) {
        self.seq += 1;
        self.heap.push(Reverse(Scheduled { at, seq: self.seq, item }));
    }

    fn envelope(&self, kind: EnvelopeKind, from: u16, to: u16, m: &ProtocolMessage) -> Result<Vec<u8>, NetError> {
        let mut e = Envelope::new(kind, from, m.to_wire());
        if let Some(keys) = &self.config.auth {
            e.seal(&keys[from as usize - 1], to)?;
        }
        Ok(e.encode())
    }

    pub fn p2p_send(&mut self, from: u16, dest: Dest, m: &ProtocolMessage) -> Result<(), NetError> {
        self.p2p_send_at(self.now, from, dest, m)
    }

    /// Sends at virtual time `depart` (not earlier than now), e.g. after
    /// the sender finished computing.
    pub fn p2p_send_at(&mut self, depart: Duration, from: u16, dest: Dest, m: &ProtocolMessage) -> Result<(), NetError> {
        self.check(from)?;
        let targets: Vec<u16> = match dest {
            Dest::Party(to) => {
                self.check(to)?;
                vec![to]
            }
            Dest::All => (1..=self.config.n).filter(|j| *j != from).collect(),
        };
        if self.crashed.contains(&from) {
            self.stats.dropped_crashed += targets.len() as u64;
            return Ok(());
        }
        let depart = depart.max(self.now);
        for to in targets {
            self.stats.sent += 1;
            if to != from && self.config.drop_prob > 0.0 && self.rng.gen_bool(self.config.drop_prob) {
                self.stats.dropped_lossy += 1;
                continue;
            }
            let copies = if to != from && self.config.duplicate_prob > 0.0 && self.rng.gen_bool(self.config.duplicate_prob) {
                self.stats.duplicated += 1;
                2
            } else {
                1
            };
            for _ in 0..copies {
                let delay = self.config.latency.sample(from, to, &mut self.rng);
                let bytes = self.envelope(EnvelopeKind::P2p, from, to, m)?;
                self.push(depart + delay, Item::Envelope { to, bytes });
            }
        }
        Ok(())
    }

    pub fn tob_broadcast(&mut self, from: u16, m: &ProtocolMessage) -> Result<(), NetError> {
        self.tob_broadcast_at(self.now, from, m)
    }

    /// Orders `m` through the sequencer and delivers it to every party,
    /// the sender included. Broadcasts are ordered by call order.
    pub fn tob_broadcast_at(&mut self, depart: Duration, from: u16, m: &ProtocolMessage) -> Result<(), NetError> {
        if !self.config.tob_enabled {
            return Err(NetError::TobDisabled);
        }
        self.check(from)?;
        if self.crashed.contains(&from) {
            self.stats.dropped_crashed += 1;
            return Ok(());
        }
        self.stats.tob_broadcasts += 1;
        let ordered = depart.max(self.now) + self.config.tob_latency;
        for to in 1..=self.config.n {
            let at = ordered.max(self.tob_last[to as usize]);
            self.tob_last[to as usize] = at;
            let bytes = self.envelope(EnvelopeKind::TobDeliver, from, to, m)?;
            self.push(at, Item::Envelope { to, bytes });
        }
        Ok(())
    }

    /// Sends on the channel the message declares.
    pub fn send(&mut self, depart: Duration, from: u16, m: &ProtocolMessage) -> Result<(), NetError> {
        match m.channel {
            Channel::P2p => self.p2p_send_at(depart, from, Dest::All, m),
            Channel::Tob => self.tob_broadcast_at(depart, from, m),
        }
    }

    pub fn schedule_timer(&mut self, at: Duration, node: u16, token: u64) {
        self.push(at.max(self.now), Item::Deferred(Delivery::Timer { node, token }));
    }

    /// Re-queues a delivery for later, e.g. while its target is busy.
    pub fn defer(&mut self, at: Duration, d: Delivery) {
        self.push(at.max(self.now), Item::Deferred(d));
    }

    /// Time of the next event, if any.
    pub fn peek_time(&self) -> Option<Duration> {
        self.heap.peek().map(|Reverse(s)| s.at)
    }

    /// Advances virtual time to the next event and returns it. Events for
    /// crashed nodes and envelopes that fail authentication are consumed
    /// silently.
    pub fn next_delivery(&mut self) -> Option<(Duration, Delivery)> {
        while let Some(Reverse(s)) = self.heap.pop() {
            self.now = s.at;
            match s.item {
                Item::Deferred(d) => {
                    let node = match &d {
                        Delivery::Message { to, .. } => *to,
                        Delivery::Timer { node, .. } => *node,
                    };
                    if self.crashed.contains(&node) {
                        continue;
                    }
                    return Some((s.at, d));
                }
                Item::Envelope { to, bytes } => {
                    if self.crashed.contains(&to) {
                        self.stats.dropped_crashed += 1;
                        continue;
                    }
                    let Ok(env) = Envelope::decode(&bytes) else {
                        self.stats.undecodable += 1;
                        continue;
                    };
                    if let Some(keys) = &self.config.auth {
                        if env.verify(&keys[to as usize - 1]).is_err() {
                            self.stats.auth_failures += 1;
                            continue;
                        }
                    }
                    let Ok(message) = ProtocolMessage::from_wire(&env.wire) else {
                        self.stats.undecodable += 1;
                        continue;
                    };
                    self.stats.delivered += 1;
                    if let Some(trace) = &mut self.trace {
                        trace.push(TraceEntry {
                            at: s.at,
                            to,
                            from: env.from,
                            channel: message.channel,
                            wire: env.wire.clone(),
                        });
                    }
                    return Some((
                        s.at,
                        Delivery::Message {
                            to,
                            from: env.from,
                            message,
                        },
                    ));
                }
            }
        }
        None
    }

    /// Injects raw envelope bytes for `to`; used to test that forged
    /// traffic is filtered.
    pub fn inject_raw(&mut self, at: Duration, to: u16, bytes: Vec<u8>) {
        self.push(at.max(self.now), Item::Envelope { to, bytes });
    }
}
