//! Acceptance suite. Every test prints one `criterion N: PASS` or
//! `criterion N: FAIL` line; run with `-- --nocapture --test-threads 1` to
//! see them in order.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use ark_ec::pairing::Pairing;
use ark_serialize::CanonicalDeserialize;
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use tcs_bench::metrics::{knee_capacity, latency_fairness_index, residual_delay_factor, theta, CurvePoint};
use tcs_bench::{build_report, emit, run_plan, CostModel, ExperimentPlan};
use tcs_core::{Channel, InstanceId, InstanceManager, KeyStore, ManagerConfig, ManualClock, NullSink, Payload, PollResult, ProtocolMessage, Step};
use tcs_network::{LatencyModel, Mode, NetConfig, Peer};
use tcs_schemes::groups::{EdPoint, FieldScalar, PrimeGroup, G1, G2};
use tcs_schemes::keys::PublicKey;
use tcs_schemes::{
    api, DealOptions, KeyShare, PartialResult, PublicKeyMaterial, Request, RequestBinding, SchemeId, ShareValue,
    Signature, SigningPackage, ThresholdOutput, ThresholdParams,
};
use tcs_service::RpcClient;

/// Prints the criterion line, then re-raises a failure.
fn criterion(id: &str, body: impl FnOnce()) {
    let r = catch_unwind(AssertUnwindSafe(body));
    println!("criterion {id}: {}", if r.is_ok() { "PASS" } else { "FAIL" });
    if let Err(e) = r {
        resume_unwind(e);
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn deal(scheme: SchemeId, n: u16, t: u16, seed: u8) -> (PublicKeyMaterial, Vec<KeyShare>) {
    api::deal_keys_seeded(scheme, ThresholdParams::new(n, t).unwrap(), &DealOptions::test(), [seed; 32]).unwrap()
}

fn subsets(n: u16, k: usize) -> Vec<Vec<u16>> {
    fn go(from: u16, n: u16, k: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..=n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

fn request(scheme: SchemeId, pk: &PublicKeyMaterial, msg: &[u8], seed: u64) -> Request {
    match scheme {
        SchemeId::Sg02 | SchemeId::Bz03 => Request::Decrypt(api::encrypt(pk, b"acceptance", msg, &mut rng(seed)).unwrap()),
        SchemeId::Cks05 => Request::Coin(msg.to_vec()),
        _ => Request::Sign(msg.to_vec()),
    }
}

/// KG20 over the signing set `set`: both rounds, the responses and the
/// package they answer.
fn frost(pk: &PublicKeyMaterial, keys: &[KeyShare], set: &[u16], m: &[u8], seed: u64) -> (SigningPackage, Vec<PartialResult>) {
    let mut r = rng(seed);
    let mut nonces: BTreeMap<u16, _> = set
        .iter()
        .map(|i| (*i, api::frost_round1(&keys[*i as usize - 1], &mut r).unwrap()))
        .collect();
    let commitments = nonces.iter().map(|(i, n)| (*i, *n.commitment())).collect();
    let package = SigningPackage::new(&pk.params, m, set, &commitments).unwrap();
    let parts = set
        .iter()
        .map(|i| api::frost_round2(&keys[*i as usize - 1], &package, nonces.get_mut(i).unwrap()).unwrap())
        .collect();
    (package, parts)
}

// ---------------------------------------------------------------- 1

fn correctness_matrix(scheme: SchemeId, n: u16, t: u16) {
    let (pk, keys) = deal(scheme, n, t, 10 + n as u8);
    let msg = format!("{scheme} at {n}/{t}").into_bytes();
    let req = request(scheme, &pk, &msg, 1);
    let binding = RequestBinding::compute(&pk, &req).unwrap();
    let quorum = t as usize + 1;
    let mut outputs = HashSet::new();

    if scheme == SchemeId::Kg20 {
        for (k, set) in subsets(n, quorum).into_iter().enumerate() {
            let (package, parts) = frost(&pk, &keys, &set, &msg, k as u64);
            for p in &parts {
                assert!(api::verify_frost_share(&pk, &binding, &package, p).unwrap());
            }
            let out = api::combine_frost(&pk, &binding, &package, &parts).unwrap();
            assert!(api::verify_result(&pk, &req, &out), "{set:?}");
            // t responses of a (t+1)-set do not make a signature.
            let short = api::combine_frost(&pk, &binding, &package, &parts[..t as usize]);
            assert!(short.map(|o| !api::verify_result(&pk, &req, &o)).unwrap_or(true));
        }
        // Nor does a signing set of t parties.
        let set: Vec<u16> = (1..=t).collect();
        let commitments = BTreeMap::new();
        assert!(SigningPackage::new(&pk.params, &msg, &set, &commitments).is_err());
        return;
    }

    let mut r = rng(2);
    let parts: Vec<PartialResult> = keys.iter().map(|k| api::create_share(k, &req, &mut r).unwrap()).collect();
    for p in &parts {
        assert!(api::verify_share(&pk, &binding, &req, p).unwrap(), "{scheme} share {}", p.index);
    }
    for set in subsets(n, quorum) {
        let chosen: Vec<_> = set.iter().map(|i| parts[*i as usize - 1].clone()).collect();
        let out = api::combine(&pk, &binding, &req, &chosen).unwrap();
        assert!(api::verify_result(&pk, &req, &out), "{scheme} {set:?}");
        if let ThresholdOutput::Plaintext(p) = &out {
            assert_eq!(p, &msg);
        }
        outputs.insert(out.to_bytes());
    }
    if scheme.is_deterministic() || matches!(req, Request::Decrypt(_)) {
        assert_eq!(outputs.len(), 1, "{scheme}: outputs differ across subsets");
    }
    for set in subsets(n, t as usize) {
        let chosen: Vec<_> = set.iter().map(|i| parts[*i as usize - 1].clone()).collect();
        assert!(api::combine(&pk, &binding, &req, &chosen).is_err(), "{scheme} combined {set:?}");
    }
}

#[test]
fn criterion_1_scheme_correctness_matrix() {
    criterion("1", || {
        let start = Instant::now();
        for scheme in SchemeId::ALL {
            for (n, t) in [(4, 1), (7, 2)] {
                correctness_matrix(scheme, n, t);
            }
        }
        assert!(start.elapsed() < Duration::from_secs(120), "{:?}", start.elapsed());
    });
}

// ---------------------------------------------------------------- 2

const MESSAGES: usize = 100;

fn bls_pairing_check(pk: &G2, m: &[u8], sigma: &G1) -> bool {
    type E = ark_bn254::Bn254;
    let g1 = |p: &G1| ark_bn254::G1Affine::deserialize_compressed(&p.to_bytes()[..]).unwrap();
    let g2 = |p: &G2| ark_bn254::G2Affine::deserialize_compressed(&p.to_bytes()[..]).unwrap();
    E::pairing(g1(sigma), g2(&G2::generator())) == E::pairing(g1(&tcs_schemes::bls04::hash_message(m)), g2(pk))
}

/// Counter-mode SHA-256 expansion to the modulus width, reduced mod N.
fn fdh_sha256_ctr(n: &BigUint, m: &[u8]) -> BigUint {
    let width = n.bits().div_ceil(8) as usize;
    let mut out = Vec::new();
    let mut counter = 0u32;
    while out.len() < width {
        let mut h = Sha256::new();
        h.update(b"tcs/SH00/fdh");
        h.update(counter.to_be_bytes());
        h.update((m.len() as u64).to_be_bytes());
        h.update(m);
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(width);
    BigUint::from_bytes_be(&out) % n
}

#[test]
fn criterion_2_single_verifier_compatibility() {
    criterion("2", || {
        let (bls_pk, bls_keys) = deal(SchemeId::Bls04, 4, 1, 21);
        let (sh_pk, sh_keys) = deal(SchemeId::Sh00, 4, 1, 22);
        let (kg_pk, kg_keys) = deal(SchemeId::Kg20, 4, 1, 23);
        let PublicKey::Bls04(bk) = &bls_pk.key else { unreachable!() };
        let PublicKey::Sh00(sk) = &sh_pk.key else { unreachable!() };
        let PublicKey::Kg20(kk) = &kg_pk.key else { unreachable!() };
        let vk = ed25519_dalek::VerifyingKey::from_bytes(&kk.pk.compress()).unwrap();
        let mut failures = 0;
        let mut r = rng(3);
        for i in 0..MESSAGES {
            let m = format!("message {i}").into_bytes();
            let req = Request::Sign(m.clone());

            let b = RequestBinding::compute(&bls_pk, &req).unwrap();
            let parts: Vec<_> = bls_keys[1..3].iter().map(|k| api::create_share(k, &req, &mut r).unwrap()).collect();
            let ThresholdOutput::Signature(Signature::Bls04(sigma)) = api::combine(&bls_pk, &b, &req, &parts).unwrap() else {
                unreachable!()
            };
            failures += !bls_pairing_check(&bk.pk, &m, &sigma) as usize;

            let b = RequestBinding::compute(&sh_pk, &req).unwrap();
            let parts: Vec<_> = sh_keys[2..4].iter().map(|k| api::create_share(k, &req, &mut r).unwrap()).collect();
            let ThresholdOutput::Signature(Signature::Sh00(y)) = api::combine(&sh_pk, &b, &req, &parts).unwrap() else {
                unreachable!()
            };
            failures += (y.modpow(&sk.modulus.e, &sk.modulus.n) != fdh_sha256_ctr(&sk.modulus.n, &m)) as usize;

            let set = [1 + (i % 4) as u16, 1 + ((i + 1) % 4) as u16];
            let mut set = set.to_vec();
            set.sort();
            let b = RequestBinding::compute(&kg_pk, &req).unwrap();
            let (package, parts) = frost(&kg_pk, &kg_keys, &set, &m, i as u64);
            let out = api::combine_frost(&kg_pk, &b, &package, &parts).unwrap();
            let sig = ed25519_dalek::Signature::from_slice(&out.to_bytes()).unwrap();
            failures += vk.verify_strict(&m, &sig).is_err() as usize;
        }
        assert_eq!(failures, 0);
    });
}

// ---------------------------------------------------------------- 3

type Tamper = fn(&mut ShareValue);

fn corrupt(v: &mut ShareValue) {
    match v {
        ShareValue::Sg02 { u_i, .. } | ShareValue::Cks05 { g_i: u_i, .. } => *u_i = *u_i + EdPoint::generator(),
        ShareValue::Bz03 { u_i } => *u_i = *u_i + G2::generator(),
        ShareValue::Sh00 { x_i, .. } => *x_i += 1u32,
        ShareValue::Bls04 { sigma_i } => *sigma_i = *sigma_i + G1::generator(),
        ShareValue::Kg20 { z_i } => *z_i = *z_i + FieldScalar::one(),
    }
}

/// Instance managers wired by a FIFO queue; `bad` rewrites its own shares
/// before they leave.
struct Cluster {
    managers: Vec<InstanceManager>,
    queue: VecDeque<(u16, ProtocolMessage)>,
    bad: Option<(u16, Tamper)>,
}

impl Cluster {
    fn new(keys: &[KeyShare], seed: u8) -> Self {
        let clock = Arc::new(ManualClock::new());
        let managers = keys
            .iter()
            .map(|k| {
                let mut store = KeyStore::new();
                store.insert("k", k.clone()).unwrap();
                let config = ManagerConfig {
                    seed: [seed ^ k.index as u8; 32],
                    ..ManagerConfig::default()
                };
                InstanceManager::new(k.index, store, config, clock.clone(), Arc::new(NullSink)).unwrap()
            })
            .collect();
        Cluster {
            managers,
            queue: VecDeque::new(),
            bad: None,
        }
    }

    fn route(&mut self, from: u16, step: Step) {
        for mut m in step.outgoing {
            if let Some((who, f)) = self.bad {
                if who == from {
                    if let Ok(Payload::Share(mut p)) = m.decode_payload() {
                        f(&mut p.value);
                        m = ProtocolMessage::new(m.instance_id, m.sender, m.round, m.channel, &Payload::Share(p));
                    }
                }
            }
            for to in 1..=self.managers.len() as u16 {
                if to != from || m.channel == Channel::Tob {
                    self.queue.push_back((to, m.clone()));
                }
            }
        }
    }

    fn run(&mut self, scheme: SchemeId, req: &Request) -> InstanceId {
        let mut id = None;
        for i in 0..self.managers.len() {
            let (x, step) = self.managers[i].start_instance(scheme, "k", req.clone()).unwrap();
            id = Some(x);
            self.route(i as u16 + 1, step);
        }
        while let Some((to, m)) = self.queue.pop_front() {
            let step = self.managers[to as usize - 1].dispatch_incoming(&m);
            self.route(to, step);
        }
        id.unwrap()
    }
}

fn with_corrupted_share(scheme: SchemeId, seed: u8) -> Vec<PollResult> {
    let (pk, keys) = deal(scheme, 4, 1, 30 + scheme as u8);
    let req = request(scheme, &pk, b"robustness", 4);
    let mut c = Cluster::new(&keys, seed);
    c.bad = Some((2, corrupt));
    let id = c.run(scheme, &req);
    let results: Vec<PollResult> = [1, 3, 4].iter().map(|i| c.managers[*i - 1].poll_result(&id)).collect();
    for r in &results {
        match (scheme, r) {
            (SchemeId::Kg20, PollResult::Failed(_)) => {}
            (SchemeId::Kg20, other) => panic!("KG20 should abort, got {other:?}"),
            (_, PollResult::Finished(out)) => {
                assert!(api::verify_result(&pk, &req, out), "{scheme}");
                if let ThresholdOutput::Plaintext(p) = out {
                    assert_eq!(p, b"robustness");
                }
            }
            (_, other) => panic!("{scheme}: {other:?}"),
        }
    }
    results
}

#[test]
fn criterion_3_robustness_and_abort() {
    criterion("3", || {
        for scheme in SchemeId::ALL {
            let a = with_corrupted_share(scheme, 1);
            assert_eq!(a, with_corrupted_share(scheme, 1), "{scheme} not deterministic");
        }
    });
}

// ---------------------------------------------------------------- 4, 5

#[test]
fn criterion_4_metric_formula_fidelity() {
    const TOL: f64 = 0.005;
    const ROWS: [(&str, f64, f64); 6] = [
        ("SG02", 2.764, 0.266),
        ("BZ03", 1.074, 0.482),
        ("SH00", 0.986, 0.503),
        ("BLS04", 0.953, 0.512),
        ("KG20", 0.260, 0.793),
        ("CKS05", 3.285, 0.233),
    ];
    criterion("4", || {
        for (name, delta, eta) in ROWS {
            assert!((1.0 / (1.0 + delta) - eta).abs() <= TOL, "{name}");
            // Through the library: a latency pair with this δ.
            let (lt, l95) = (0.25, 0.25 * (1.0 + delta));
            assert!((residual_delay_factor(l95, lt).unwrap() - delta).abs() < 1e-12);
            assert!((latency_fairness_index(lt, l95).unwrap() - eta).abs() <= TOL, "{name}");
        }
    });
}

#[test]
fn criterion_5_theta_definition() {
    criterion("5", || {
        let th = theta(127, 42);
        assert!((th - 33.86).abs() <= 0.01, "{th}");
        assert_eq!(th.round(), 34.0);
    });
}

// ---------------------------------------------------------------- 6, 7, 8

const NEGLIGIBLE: CostModel = CostModel {
    share_ms: 0.01,
    verify_ms: 0.01,
    combine_ms: 0.01,
};

fn sim_plan(preset: &str, scheme: SchemeId, rate: u32, duration_s: f64, latency_ms: f64) -> ExperimentPlan {
    let mut p = ExperimentPlan::new(preset, vec![scheme]);
    p.rates = Some(vec![rate]);
    p.duration_s = duration_s;
    p.seed = 6;
    p.latency = Some(LatencyModel::constant(latency_ms));
    p.compute.insert(scheme, NEGLIGIBLE);
    p
}

fn l_theta_ms(p: &ExperimentPlan) -> f64 {
    let runs = run_plan(p).unwrap();
    let report = build_report(&p.preset, &runs, p.grace, p.usable_factor).unwrap();
    assert!(report.rows[0].completed >= 200);
    report.rows[0].l_theta.unwrap() * 1e3
}

#[test]
fn criterion_6_round_structure_latency_signal() {
    criterion("6", || {
        let one_round = 100.0..200.0;
        let two_rounds = 200.0..400.0;
        let sg02 = l_theta_ms(&sim_plan("local-4", SchemeId::Sg02, 20, 10.0, 100.0));
        assert!(one_round.contains(&sg02), "SG02 {sg02}");
        let mut p = sim_plan("local-4", SchemeId::Kg20, 20, 10.0, 100.0);
        let kg20 = l_theta_ms(&p);
        assert!(two_rounds.contains(&kg20), "KG20 {kg20}");
        p.precompute = true;
        let pre = l_theta_ms(&p);
        assert!(one_round.contains(&pre), "KG20 precomputed {pre}");
    });
}

/// Share of 100 decrypt requests finalized by some live node with the
/// given parties crashed at n = 7, t = 2.
fn finalized_share(crashed: &[u16]) -> f64 {
    let mut p = sim_plan("local-7", SchemeId::Sg02, 20, 5.0, 10.0);
    p.crashed = crashed.to_vec();
    let run = &run_plan(&p).unwrap()[0];
    assert_eq!(run.submitted, 100);
    run.finalized_by(1) as f64 / run.submitted as f64
}

#[test]
fn criterion_7a_t_crashed_all_finalize() {
    criterion("7a", || assert_eq!(finalized_share(&[6, 7]), 1.0));
}

/// Taken literally: t+1 = 3 crashed leaves 4 live parties, one more than
/// the quorum, so a correct deployment still finalizes everything.
#[test]
fn criterion_7b_t_plus_one_crashed_none_finalize() {
    criterion("7b", || {
        let share = finalized_share(&[5, 6, 7]);
        assert_eq!(share, 0.0, "{:.0}% finalized with 4 of 7 parties live and a quorum of 3", share * 100.0);
    });
}

#[test]
fn criterion_7c_below_quorum_none_finalize() {
    criterion("7c", || assert_eq!(finalized_share(&[3, 4, 5, 6, 7]), 0.0));
}

#[test]
fn criterion_8_determinism() {
    criterion("8", || {
        let mut p = ExperimentPlan::new("global-7", vec![SchemeId::Sg02, SchemeId::Bls04, SchemeId::Kg20]);
        p.rates = Some(vec![1, 2, 4]);
        p.duration_s = 3.0;
        p.seed = 8;
        let files = |dir: &Path| {
            let runs = run_plan(&p).unwrap();
            let r = build_report(&p.preset, &runs, p.grace, p.usable_factor).unwrap();
            emit::emit_report(&r, dir).unwrap();
            ["metrics.csv", "nodes.csv", "capacity.csv"].map(|f| std::fs::read(dir.join(f)).unwrap())
        };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(files(a.path()), files(b.path()));
    });
}

// ---------------------------------------------------------------- 9

struct Processes(Vec<Child>);

impl Drop for Processes {
    fn drop(&mut self) {
        for c in &mut self.0 {
            let _ = c.kill();
            let _ = c.wait();
        }
    }
}

fn free_ports(k: usize) -> Vec<u16> {
    let ls: Vec<_> = (0..k).map(|_| std::net::TcpListener::bind("127.0.0.1:0").unwrap()).collect();
    ls.iter().map(|l| l.local_addr().unwrap().port()).collect()
}

#[test]
fn criterion_9_end_to_end_service() {
    criterion("9", || {
        let dir = tempfile::tempdir().unwrap();
        let keys = dir.path().join("keys");
        let status = Command::new(env!("CARGO_BIN_EXE_deal"))
            .args(["--scheme", "SG02", "--n", "4", "--t", "1", "--seed"])
            .arg(hex::encode([9u8; 32]))
            .arg("--out")
            .arg(&keys)
            .stdout(Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());

        let ports = free_ports(8);
        let mut procs = Processes(Vec::new());
        let mut rpc = Vec::new();
        for i in 1..=4u16 {
            let cfg = NetConfig {
                self_index: i,
                peers: (1..=4)
                    .map(|j| Peer {
                        index: j,
                        address: format!("127.0.0.1:{}", ports[j as usize - 1]),
                    })
                    .collect(),
                mode: Mode::Sockets,
                latency: LatencyModel::constant(0.0),
                tob_enabled: false,
                tob_latency_ms: 0.0,
                auth_enabled: false,
                rpc_listen: format!("127.0.0.1:{}", ports[3 + i as usize]),
            };
            let path = dir.path().join(format!("node-{i}.json"));
            std::fs::write(&path, cfg.to_json_pretty()).unwrap();
            rpc.push(cfg.rpc_listen.parse().unwrap());
            procs.0.push(
                Command::new(env!("CARGO_BIN_EXE_node"))
                    .arg("--config")
                    .arg(&path)
                    .arg("--keys")
                    .arg(&keys)
                    .env_remove("TCS_RPC_LISTEN")
                    .env("TCS_LOG", "warn")
                    .stdout(Stdio::null())
                    .spawn()
                    .unwrap(),
            );
        }

        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async {
            let mut cs = Vec::new();
            for a in &rpc {
                cs.push(RpcClient::connect_ready(*a, Duration::from_secs(30)).await.unwrap());
            }
            let plaintext = b"end to end".to_vec();
            let ct = cs[0].encrypt("sg02", b"e2e", &plaintext).await.unwrap();
            let req = Request::Decrypt(ct);
            let submitted = Instant::now();
            let mut id = String::new();
            for c in cs.iter_mut() {
                id = c.submit(SchemeId::Sg02, None, req.clone()).await.unwrap();
            }
            for c in cs.iter_mut() {
                let left = Duration::from_secs(5).saturating_sub(submitted.elapsed());
                let r = c.wait(&id, left).await.unwrap();
                assert_eq!(r.result.as_deref(), Some(&plaintext[..]));
            }
            assert!(submitted.elapsed() <= Duration::from_secs(5));

            // Same request through the scheme API, driven by hand.
            let mut shares = Vec::new();
            for c in cs[2..4].iter_mut() {
                shares.push(c.create_share("sg02", &req).await.unwrap());
            }
            for s in &shares {
                assert!(cs[0].verify_share("sg02", &req, s).await.unwrap());
            }
            let out = cs[0].combine("sg02", &req, &shares).await.unwrap();
            assert!(cs[1].verify_result("sg02", &req, &out).await.unwrap());
            assert_eq!(out, ThresholdOutput::Plaintext(plaintext));
        });
    });
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_knee_detection_oracle() {
    fn curve(rates: &[f64], tp: impl Fn(f64) -> f64, l95: impl Fn(f64) -> f64) -> Vec<CurvePoint> {
        rates
            .iter()
            .map(|&r| CurvePoint {
                rate: r,
                throughput: tp(r),
                l95: l95(r),
            })
            .collect()
    }
    let ladder: Vec<f64> = (0..8).map(|i| f64::from(1u32 << i)).collect();
    let cases: Vec<(Vec<CurvePoint>, f64)> = vec![
        // Saturates at 8: flat latency until then, then latency explodes.
        (curve(&ladder, |r| r.min(8.0), |r| if r <= 8.0 { 0.1 } else { 0.1 * r }), 8.0),
        // Ratio 1, 4, 9, 4, 1 peaks in the middle.
        (
            vec![
                CurvePoint { rate: 1.0, throughput: 1.0, l95: 1.0 },
                CurvePoint { rate: 2.0, throughput: 2.0, l95: 0.5 },
                CurvePoint { rate: 4.0, throughput: 3.0, l95: 1.0 / 3.0 },
                CurvePoint { rate: 8.0, throughput: 4.0, l95: 1.0 },
                CurvePoint { rate: 16.0, throughput: 2.0, l95: 2.0 },
            ],
            4.0,
        ),
        // Monotone ratio: the last rate.
        (curve(&ladder[..5], |r| r, |_| 0.2), 16.0),
        // Latency grows from the start: the first rate.
        (curve(&ladder[..5], |r| r, |r| r * r), 1.0),
        // Equal ratios at 2 and 4 resolve to the lower rate.
        (
            vec![
                CurvePoint { rate: 1.0, throughput: 1.0, l95: 1.0 },
                CurvePoint { rate: 2.0, throughput: 2.0, l95: 0.5 },
                CurvePoint { rate: 4.0, throughput: 4.0, l95: 1.0 },
                CurvePoint { rate: 8.0, throughput: 4.0, l95: 4.0 },
            ],
            2.0,
        ),
    ];
    criterion("10", || {
        for (i, (c, knee)) in cases.iter().enumerate() {
            assert_eq!(knee_capacity(c).unwrap(), *knee, "curve {i}");
        }
    });
}
