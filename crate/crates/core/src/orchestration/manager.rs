use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use tcs_schemes::{api, kg20, KeyShare, NonceStore, FrostNonceCommitment, Request, SchemeId, ThresholdOutput};

use super::clock::Clock;
use super::events::{Event, EventKind, EventSink};
use super::keystore::KeyStore;
use crate::error::{OrchestrationError, ProtocolError};
use crate::message::{Channel, InstanceId, Payload, ProtocolMessage, PRECOMPUTE_ROUND};
use crate::protocol::{instance_rng, FrostProtocol, MessageStats, SingleRoundProtocol, ThresholdRoundProtocol};

#[derive(Clone, Debug)]
pub struct ManagerConfig {
    /// Send FROST commitments over total-order broadcast.
    pub tob_enabled: bool,
    /// How long a terminated instance stays pollable.
    pub retention: Duration,
    /// Messages buffered for instances not started locally.
    pub pending_capacity: usize,
    /// Terminated instances kept regardless of age.
    pub max_retained: usize,
    /// Parties considered live when choosing a FROST signing set. `None`
    /// means all of them.
    pub live_parties: Option<Vec<u16>>,
    pub seed: [u8; 32],
}

impl Default for ManagerConfig {
    fn default() -> Self {
        ManagerConfig {
            tob_enabled: false,
            retention: Duration::from_secs(60),
            pending_capacity: 65_536,
            max_retained: 100_000,
            live_parties: None,
            seed: rand::random(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceState {
    Created,
    Running,
    Finished,
    Failed,
}

#[derive(Clone, Debug)]
pub struct InstanceRecord {
    pub id: InstanceId,
    pub scheme: SchemeId,
    pub key_id: String,
    pub state: InstanceState,
    pub result: Option<ThresholdOutput>,
    pub error: Option<String>,
    pub started_at: Duration,
    pub finished_at: Option<Duration>,
    pub stats: MessageStats,
    pub rounds: u8,
}

impl InstanceRecord {
    pub fn is_terminal(&self) -> bool {
        matches!(self.state, InstanceState::Finished | InstanceState::Failed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PollResult {
    Pending,
    Finished(ThresholdOutput),
    Failed(String),
    Unknown,
}

/// Cryptographic work done during one manager call, for compute-cost
/// models.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Work {
    pub shares: u32,
    pub verifications: u32,
    pub combines: u32,
}

/// Outcome of one manager call: messages to hand to the network and the
/// work performed. P2P messages go to every other party; TOB messages go
/// through the broadcast and come back to the sender too.
#[derive(Debug, Default)]
pub struct Step {
    pub outgoing: Vec<ProtocolMessage>,
    pub work: Work,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ManagerCounters {
    pub undecodable: u64,
    pub late: u64,
    pub evicted_pending: u64,
    pub evicted_records: u64,
    pub rejected_precommitments: u64,
}

#[derive(Default)]
struct Counters {
    undecodable: AtomicU64,
    late: AtomicU64,
    evicted_pending: AtomicU64,
    evicted_records: AtomicU64,
    rejected_precommitments: AtomicU64,
}

fn bump(c: &AtomicU64, by: u64) {
    c.fetch_add(by, Ordering::Relaxed);
}

struct Slot {
    record: InstanceRecord,
    protocol: Box<dyn ThresholdRoundProtocol>,
    noted: bool,
}

#[derive(Default)]
struct Registry {
    instances: HashMap<InstanceId, Arc<Mutex<Slot>>>,
    terminated: VecDeque<(Duration, InstanceId)>,
    tombstones: HashSet<InstanceId>,
    tombstone_order: VecDeque<InstanceId>,
    pending: HashMap<InstanceId, Vec<ProtocolMessage>>,
    pending_order: VecDeque<InstanceId>,
    pending_len: usize,
}

#[derive(Default)]
struct FrostKeyState {
    store: NonceStore,
    batches: u64,
    /// Instances started from precomputed commitments; the next one uses
    /// this slot.
    next_slot: u64,
    table: BTreeMap<(u16, u64), FrostNonceCommitment>,
}

/// Tracks every protocol instance of one party, routes messages to them and
/// keeps their results for polling.
pub struct InstanceManager {
    node: u16,
    keys: KeyStore,
    config: ManagerConfig,
    clock: Arc<dyn Clock>,
    events: Arc<dyn EventSink>,
    registry: Mutex<Registry>,
    frost: Mutex<HashMap<String, FrostKeyState>>,
    counters: Counters,
}

impl InstanceManager {
    pub fn new(
        node: u16,
        keys: KeyStore,
        config: ManagerConfig,
        clock: Arc<dyn Clock>,
        events: Arc<dyn EventSink>,
    ) -> Result<Self, OrchestrationError> {
        for (key_id, _) in keys.key_ids() {
            let index = keys.get(key_id)?.index;
            if index != node {
                return Err(OrchestrationError::KeyIndex {
                    key_id: key_id.to_string(),
                    index,
                    node,
                });
            }
        }
        Ok(InstanceManager {
            node,
            keys,
            config,
            clock,
            events,
            registry: Mutex::new(Registry::default()),
            frost: Mutex::new(HashMap::new()),
            counters: Counters::default(),
        })
    }

    pub fn node(&self) -> u16 {
        self.node
    }

    pub fn keys(&self) -> &KeyStore {
        &self.keys
    }

    pub fn config(&self) -> &ManagerConfig {
        &self.config
    }

    pub fn counters(&self) -> ManagerCounters {
        let c = &self.counters;
        ManagerCounters {
            undecodable: c.undecodable.load(Ordering::Relaxed),
            late: c.late.load(Ordering::Relaxed),
            evicted_pending: c.evicted_pending.load(Ordering::Relaxed),
            evicted_records: c.evicted_records.load(Ordering::Relaxed),
            rejected_precommitments: c.rejected_precommitments.load(Ordering::Relaxed),
        }
    }

    pub fn instance_count(&self) -> usize {
        self.registry.lock().instances.len()
    }

    pub fn pending_len(&self) -> usize {
        self.registry.lock().pending_len
    }

    /// Starts the instance for `request`, runs its first round and returns
    /// its id. Starting an instance that already exists is a no-op.
    pub fn start_instance(
        &self,
        scheme: SchemeId,
        key_id: &str,
        request: Request,
    ) -> Result<(InstanceId, Step), OrchestrationError> {
        let share = self.keys.get_for(scheme, key_id)?;
        if request.kind() != scheme.kind() {
            return Err(OrchestrationError::RequestKind(scheme));
        }
        if let Request::Decrypt(c) = &request {
            if !api::verify_ciphertext(&share.public, c)? {
                return Err(OrchestrationError::InvalidCiphertext);
            }
        }
        let id = InstanceId::derive(scheme, key_id, &request);
        let now = self.clock.now();
        self.sweep(now);

        let slot;
        let mut guard;
        let early;
        {
            let mut reg = self.registry.lock();
            if reg.instances.contains_key(&id) {
                return Ok((id, Step::default()));
            }
            let protocol = self.build_protocol(id, key_id, &share, request)?;
            slot = Arc::new(Mutex::new(Slot {
                record: InstanceRecord {
                    id,
                    scheme,
                    key_id: key_id.to_string(),
                    state: InstanceState::Created,
                    result: None,
                    error: None,
                    started_at: now,
                    finished_at: None,
                    stats: MessageStats::default(),
                    rounds: 0,
                },
                protocol,
                noted: false,
            }));
            // Locked before it becomes visible so that round 1 runs first.
            guard = slot.lock();
            reg.tombstones.remove(&id);
            reg.instances.insert(id, slot.clone());
            early = reg.take_pending(&id);
        }
        self.emit(id, scheme, EventKind::Started);

        let mut step = Step::default();
        self.advance(&mut guard, &mut step);
        for m in &early {
            self.feed(&mut guard, m, &mut step);
        }
        self.drive(&mut guard, &mut step);
        self.settle(guard);
        Ok((id, step))
    }

    fn build_protocol(
        &self,
        id: InstanceId,
        key_id: &str,
        share: &Arc<KeyShare>,
        request: Request,
    ) -> Result<Box<dyn ThresholdRoundProtocol>, OrchestrationError> {
        let rng = instance_rng(&self.config.seed, self.node, &id);
        if share.scheme != SchemeId::Kg20 {
            return Ok(Box::new(SingleRoundProtocol::new(id, share.clone(), request, rng)?));
        }
        let Request::Sign(message) = request else {
            return Err(OrchestrationError::RequestKind(share.scheme));
        };
        let params = share.public.params;
        let live: Vec<u16> = match &self.config.live_parties {
            Some(l) => l.clone(),
            None => params.indices().collect(),
        };
        let set = kg20::default_signing_set(&params, &live)?;

        let mut frost = self.frost.lock();
        let st = frost.entry(key_id.to_string()).or_default();
        let slot_no = st.next_slot;
        let commitments: Option<BTreeMap<u16, FrostNonceCommitment>> = set
            .iter()
            .map(|i| st.table.get(&(*i, slot_no)).map(|c| (*i, *c)))
            .collect();
        let member = set.contains(&self.node);
        let own_ready = !member || st.store.commitment(slot_no).is_some();
        match commitments {
            Some(commitments) if own_ready => {
                st.next_slot += 1;
                for i in &set {
                    st.table.remove(&(*i, slot_no));
                }
                let own = if member { Some(st.store.take(slot_no)?) } else { None };
                Ok(Box::new(FrostProtocol::with_precomputed(
                    id,
                    share.clone(),
                    message,
                    commitments,
                    own,
                    rng,
                )?))
            }
            _ => Ok(Box::new(FrostProtocol::new(
                id,
                share.clone(),
                message,
                set,
                self.config.tob_enabled,
                rng,
            )?)),
        }
    }

    /// Routes an encoded message. Undecodable input is counted and dropped.
    pub fn dispatch_bytes(&self, bytes: &[u8]) -> Step {
        match ProtocolMessage::from_wire(bytes) {
            Ok(m) => self.dispatch_incoming(&m),
            Err(_) => {
                bump(&self.counters.undecodable, 1);
                Step::default()
            }
        }
    }

    pub fn dispatch_incoming(&self, m: &ProtocolMessage) -> Step {
        let mut step = Step::default();
        if m.round == PRECOMPUTE_ROUND {
            self.accept_precommitments(m);
            return step;
        }
        self.sweep(self.clock.now());
        let slot = {
            let mut reg = self.registry.lock();
            match reg.instances.get(&m.instance_id) {
                Some(s) => s.clone(),
                None => {
                    if reg.tombstones.contains(&m.instance_id) {
                        bump(&self.counters.late, 1);
                    } else {
                        let evicted = reg.buffer(m.clone(), self.config.pending_capacity);
                        bump(&self.counters.evicted_pending, evicted as u64);
                    }
                    return step;
                }
            }
        };
        let mut guard = slot.lock();
        self.feed(&mut guard, m, &mut step);
        self.drive(&mut guard, &mut step);
        self.settle(guard);
        step
    }

    pub fn poll_result(&self, id: &InstanceId) -> PollResult {
        self.sweep(self.clock.now());
        let slot = match self.registry.lock().instances.get(id) {
            Some(s) => s.clone(),
            None => return PollResult::Unknown,
        };
        let g = slot.lock();
        match g.record.state {
            InstanceState::Created | InstanceState::Running => PollResult::Pending,
            InstanceState::Finished => PollResult::Finished(g.record.result.clone().expect("finished has a result")),
            InstanceState::Failed => PollResult::Failed(g.record.error.clone().unwrap_or_default()),
        }
    }

    pub fn record(&self, id: &InstanceId) -> Option<InstanceRecord> {
        let slot = self.registry.lock().instances.get(id)?.clone();
        let r = slot.lock().record.clone();
        Some(r)
    }

    /// Runs the first FROST round for `k` future signatures and returns the
    /// broadcast that publishes the commitments.
    pub fn precompute(&self, key_id: &str, k: usize) -> Result<Step, OrchestrationError> {
        self.keys.get_for(SchemeId::Kg20, key_id)?;
        let mut frost = self.frost.lock();
        let st = frost.entry(key_id.to_string()).or_default();
        let id = InstanceId::precompute(key_id, self.node, st.batches);
        st.batches += 1;
        let mut rng = instance_rng(&self.config.seed, self.node, &id);
        let batch = st.store.precompute(self.node, k, &mut rng);
        for (slot, c) in &batch {
            st.table.insert((self.node, *slot), *c);
        }
        let m = ProtocolMessage::new(
            id,
            self.node,
            PRECOMPUTE_ROUND,
            Channel::P2p,
            &Payload::Precommitments {
                key_id: key_id.to_string(),
                batch,
            },
        );
        Ok(Step {
            outgoing: vec![m],
            work: Work {
                shares: k as u32,
                ..Work::default()
            },
        })
    }

    /// Precomputed commitments not yet used, per party, for `key_id`.
    pub fn precomputed_available(&self, key_id: &str) -> BTreeMap<u16, usize> {
        let frost = self.frost.lock();
        let mut out = BTreeMap::new();
        if let Some(st) = frost.get(key_id) {
            for (party, _) in st.table.keys() {
                *out.entry(*party).or_insert(0) += 1;
            }
        }
        out
    }

    fn accept_precommitments(&self, m: &ProtocolMessage) {
        let reject = || bump(&self.counters.rejected_precommitments, 1);
        let Ok(Payload::Precommitments { key_id, batch }) = m.decode_payload() else {
            return reject();
        };
        let Ok(share) = self.keys.get_for(SchemeId::Kg20, &key_id) else {
            return reject();
        };
        if batch
            .iter()
            .any(|(_, c)| c.index != m.sender || api::verify_commitment(&share.public, c).is_err())
        {
            return reject();
        }
        let mut frost = self.frost.lock();
        let st = frost.entry(key_id).or_default();
        for (slot, c) in batch {
            if slot >= st.next_slot {
                st.table.entry((m.sender, slot)).or_insert(c);
            }
        }
    }

    fn emit(&self, instance: InstanceId, scheme: SchemeId, kind: EventKind) {
        self.events.emit(Event {
            time: self.clock.now().as_secs_f64(),
            node: self.node,
            instance,
            scheme,
            kind,
        });
    }

    fn advance(&self, slot: &mut Slot, step: &mut Step) {
        if slot.protocol.is_terminated() {
            return;
        }
        match slot.protocol.do_round() {
            Ok(out) => {
                slot.record.state = InstanceState::Running;
                if let Some(m) = out {
                    step.work.shares += 1;
                    if m.channel == Channel::P2p {
                        self.feed(slot, &m, step);
                    }
                    step.outgoing.push(m);
                }
            }
            Err(e) => self.fail(slot, e),
        }
        self.refresh(slot);
    }

    fn feed(&self, slot: &mut Slot, m: &ProtocolMessage, step: &mut Step) {
        let before = slot.protocol.stats();
        let res = slot.protocol.update(m);
        let after = slot.protocol.stats();
        step.work.verifications += after.verifications - before.verifications;
        if after.rejected > before.rejected {
            self.emit(slot.record.id, slot.record.scheme, EventKind::ShareRejected { sender: m.sender });
        }
        if after.late > before.late {
            bump(&self.counters.late, 1);
            self.emit(slot.record.id, slot.record.scheme, EventKind::Late { sender: m.sender });
        }
        if let Err(e) = res {
            if slot.protocol.is_terminated() && !slot.record.is_terminal() {
                self.fail(slot, e);
            }
        }
        self.refresh(slot);
    }

    fn drive(&self, slot: &mut Slot, step: &mut Step) {
        loop {
            if slot.record.is_terminal() || slot.protocol.is_terminated() {
                break;
            }
            if slot.protocol.is_ready_to_finalize() {
                step.work.combines += 1;
                match slot.protocol.finalize() {
                    Ok(out) => {
                        slot.record.state = InstanceState::Finished;
                        slot.record.result = Some(out);
                        slot.record.finished_at = Some(self.clock.now());
                        self.emit(slot.record.id, slot.record.scheme, EventKind::Finished);
                    }
                    Err(e) => self.fail(slot, e),
                }
                self.refresh(slot);
                break;
            }
            if slot.protocol.is_ready_for_next_round() {
                self.advance(slot, step);
                continue;
            }
            break;
        }
    }

    fn fail(&self, slot: &mut Slot, e: ProtocolError) {
        if slot.record.is_terminal() {
            return;
        }
        let reason = e.to_string();
        slot.record.state = InstanceState::Failed;
        slot.record.error = Some(reason.clone());
        slot.record.finished_at = Some(self.clock.now());
        self.emit(slot.record.id, slot.record.scheme, EventKind::Failed { reason });
    }

    fn refresh(&self, slot: &mut Slot) {
        slot.record.stats = slot.protocol.stats();
        slot.record.rounds = slot.protocol.current_round();
    }

    /// Releases the instance lock and queues a newly terminated instance
    /// for retention.
    fn settle(&self, mut guard: parking_lot::MutexGuard<'_, Slot>) {
        let noted = match guard.record.finished_at {
            Some(at) if guard.record.is_terminal() && !guard.noted => {
                guard.noted = true;
                Some((at, guard.record.id))
            }
            _ => None,
        };
        drop(guard);
        if let Some(entry) = noted {
            self.registry.lock().terminated.push_back(entry);
        }
    }

    fn sweep(&self, now: Duration) {
        let mut reg = self.registry.lock();
        let mut evicted = 0;
        while let Some(&(at, id)) = reg.terminated.front() {
            let expired = at + self.config.retention <= now;
            if !expired && reg.terminated.len() <= self.config.max_retained {
                break;
            }
            reg.terminated.pop_front();
            reg.instances.remove(&id);
            reg.tombstone(id, self.config.max_retained.max(1024) * 4);
            evicted += 1;
        }
        bump(&self.counters.evicted_records, evicted);
    }
}

impl Registry {
    fn take_pending(&mut self, id: &InstanceId) -> Vec<ProtocolMessage> {
        match self.pending.remove(id) {
            Some(v) => {
                self.pending_len -= v.len();
                self.pending_order.retain(|x| x != id);
                v
            }
            None => Vec::new(),
        }
    }

    /// Buffers `m`, evicting the oldest buffered instances when full.
    /// Returns how many messages were evicted.
    fn buffer(&mut self, m: ProtocolMessage, capacity: usize) -> usize {
        if capacity == 0 {
            return 1;
        }
        let mut evicted = 0;
        while self.pending_len >= capacity {
            let Some(old) = self.pending_order.pop_front() else { break };
            if let Some(v) = self.pending.remove(&old) {
                self.pending_len -= v.len();
                evicted += v.len();
            }
        }
        let id = m.instance_id;
        if !self.pending.contains_key(&id) {
            self.pending_order.push_back(id);
        }
        self.pending.entry(id).or_default().push(m);
        self.pending_len += 1;
        evicted
    }

    fn tombstone(&mut self, id: InstanceId, cap: usize) {
        if self.tombstones.insert(id) {
            self.tombstone_order.push_back(id);
        }
        while self.tombstone_order.len() > cap {
            if let Some(old) = self.tombstone_order.pop_front() {
                self.tombstones.remove(&old);
            }
        }
    }
}
