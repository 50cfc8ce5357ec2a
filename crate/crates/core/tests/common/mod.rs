#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tcs_core::{
    Channel, InstanceId, InstanceManager, KeyStore, ManagerConfig, ManualClock, MemorySink, PollResult,
    ProtocolMessage, Step,
};
use tcs_schemes::{DealOptions, PublicKeyMaterial, Request, SchemeId, ThresholdParams};

pub const KEY: &str = "k";

pub type Tamper = Box<dyn FnMut(&mut ProtocolMessage)>;

/// In-memory network of instance managers. Messages are queued and
/// delivered one at a time, FIFO unless shuffled.
pub struct Cluster {
    pub n: u16,
    pub pk: PublicKeyMaterial,
    pub managers: Vec<InstanceManager>,
    pub sinks: Vec<Arc<MemorySink>>,
    pub clock: Arc<ManualClock>,
    pub queue: VecDeque<(u16, ProtocolMessage)>,
    pub crashed: HashSet<u16>,
    pub tamper: Option<(u16, Tamper)>,
    pub shuffle: Option<ChaCha20Rng>,
}

impl Cluster {
    pub fn new(scheme: SchemeId, n: u16, t: u16) -> Self {
        Self::with_config(scheme, n, t, |_| {})
    }

    pub fn with_config(scheme: SchemeId, n: u16, t: u16, tweak: impl Fn(&mut ManagerConfig)) -> Self {
        let (pk, shares) = tcs_schemes::keys::deal_keys_seeded(
            scheme,
            ThresholdParams::new(n, t).unwrap(),
            &DealOptions::test(),
            [scheme as u8 + 1; 32],
        )
        .unwrap();
        let clock = Arc::new(ManualClock::new());
        let mut managers = Vec::new();
        let mut sinks = Vec::new();
        for share in shares {
            let index = share.index;
            let mut keys = KeyStore::new();
            keys.insert(KEY, share).unwrap();
            let mut config = ManagerConfig {
                seed: [index as u8; 32],
                ..ManagerConfig::default()
            };
            tweak(&mut config);
            let sink = Arc::new(MemorySink::new());
            managers.push(InstanceManager::new(index, keys, config, clock.clone(), sink.clone()).unwrap());
            sinks.push(sink);
        }
        Cluster {
            n,
            pk,
            managers,
            sinks,
            clock,
            queue: VecDeque::new(),
            crashed: HashSet::new(),
            tamper: None,
            shuffle: None,
        }
    }

    pub fn node(&self, i: u16) -> &InstanceManager {
        &self.managers[i as usize - 1]
    }

    pub fn route(&mut self, from: u16, step: Step) {
        if self.crashed.contains(&from) {
            return;
        }
        for mut m in step.outgoing {
            if let Some((who, f)) = &mut self.tamper {
                if *who == from {
                    f(&mut m);
                }
            }
            for to in 1..=self.n {
                if to != from || m.channel == Channel::Tob {
                    self.queue.push_back((to, m.clone()));
                }
            }
        }
    }

    pub fn start_at(&mut self, node: u16, scheme: SchemeId, request: &Request) -> InstanceId {
        let (id, step) = self.node(node).start_instance(scheme, KEY, request.clone()).unwrap();
        self.route(node, step);
        id
    }

    /// Starts the request on every live node, in index order.
    pub fn start_all(&mut self, scheme: SchemeId, request: &Request) -> InstanceId {
        let live: Vec<u16> = (1..=self.n).filter(|i| !self.crashed.contains(i)).collect();
        let mut id = None;
        for i in live {
            id = Some(self.start_at(i, scheme, request));
        }
        id.expect("at least one live node")
    }

    pub fn run(&mut self) {
        while let Some((to, m)) = self.next() {
            if self.crashed.contains(&to) {
                continue;
            }
            let step = self.node(to).dispatch_incoming(&m);
            self.route(to, step);
        }
    }

    fn next(&mut self) -> Option<(u16, ProtocolMessage)> {
        if let Some(rng) = &mut self.shuffle {
            if self.queue.is_empty() {
                return None;
            }
            let v = self.queue.make_contiguous();
            v.shuffle(rng);
        }
        self.queue.pop_front()
    }

    pub fn poll(&self, node: u16, id: &InstanceId) -> PollResult {
        self.node(node).poll_result(id)
    }

    pub fn live(&self) -> Vec<u16> {
        (1..=self.n).filter(|i| !self.crashed.contains(i)).collect()
    }
}

pub fn encrypt(pk: &PublicKeyMaterial, label: &[u8], msg: &[u8], seed: u64) -> Request {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Request::Decrypt(tcs_schemes::api::encrypt(pk, label, msg, &mut rng).unwrap())
}

pub fn request_for(scheme: SchemeId, pk: &PublicKeyMaterial, i: u64) -> Request {
    match scheme {
        SchemeId::Sg02 | SchemeId::Bz03 => encrypt(pk, b"label", format!("message {i}").as_bytes(), i),
        SchemeId::Sh00 | SchemeId::Bls04 | SchemeId::Kg20 => Request::Sign(format!("message {i}").into_bytes()),
        SchemeId::Cks05 => Request::Coin(format!("coin {i}").into_bytes()),
    }
}

pub fn finished(p: PollResult) -> tcs_schemes::ThresholdOutput {
    match p {
        PollResult::Finished(out) => out,
        other => panic!("expected a finished instance, got {other:?}"),
    }
}
