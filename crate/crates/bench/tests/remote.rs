use std::sync::Arc;

use tcs_bench::remote::run_plan_remote;
use tcs_bench::ExperimentPlan;
use tcs_network::{LatencyModel, LoopbackHub, Mode, NetConfig, Peer};
use tcs_schemes::{DealOptions, SchemeId};
use tcs_service::{deal_to_dir, load_keystore, serve_with, DealSpec, Inbox, Node, NodeOptions};

fn config(i: u16, n: u16) -> NetConfig {
    NetConfig {
        self_index: i,
        peers: (1..=n)
            .map(|j| Peer {
                index: j,
                address: "127.0.0.1:0".into(),
            })
            .collect(),
        mode: Mode::Proxy,
        latency: LatencyModel::constant(0.0),
        tob_enabled: false,
        tob_latency_ms: 0.0,
        auth_enabled: false,
        rpc_listen: "127.0.0.1:0".into(),
    }
}

async fn cluster(scheme: SchemeId) -> (tempfile::TempDir, Vec<Node>) {
    let dir = tempfile::tempdir().unwrap();
    let spec = DealSpec {
        scheme,
        n: 4,
        t: 1,
        seed: [4; 32],
        key_id: None,
        options: DealOptions::test(),
        auth: false,
    };
    deal_to_dir(&spec, dir.path()).unwrap();
    let hub = LoopbackHub::new();
    let mut nodes = Vec::new();
    for i in 1..=4 {
        let (t, rx) = hub.endpoint(i, 4);
        let keys = load_keystore(dir.path(), i).unwrap();
        nodes.push(
            serve_with(&config(i, 4), keys, Arc::new(t), Inbox::Unbounded(rx), NodeOptions::default())
                .await
                .unwrap(),
        );
    }
    (dir, nodes)
}

fn plan(scheme: SchemeId, nodes: &[Node]) -> ExperimentPlan {
    let mut p = ExperimentPlan::new("local-4", vec![scheme]);
    p.rates = Some(vec![5, 10]);
    p.duration_s = 2.0;
    p.nodes = nodes.iter().map(|n| n.rpc_addr().to_string()).collect();
    p
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn remote_ladder_collects_every_node() {
    let (_dir, nodes) = cluster(SchemeId::Sg02).await;
    let runs = run_plan_remote(&plan(SchemeId::Sg02, &nodes)).await.unwrap();
    assert_eq!(runs.len(), 2);
    for r in &runs {
        assert!(r.partial.is_none());
        assert_eq!(r.submitted, (r.rate * 2) as usize);
        assert_eq!(r.finalized_by(4), r.submitted, "rate {}", r.rate);
        assert!(r.samples.iter().all(|s| s.latency() >= 0.0 && s.latency() < 2.0));
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn lost_node_marks_the_run_partial() {
    let (_dir, mut nodes) = cluster(SchemeId::Bls04).await;
    let p = plan(SchemeId::Bls04, &nodes);
    nodes[2].shutdown();
    let err = run_plan_remote(&p).await.unwrap_err();
    assert!(err.to_string().contains("node 3"), "{err}");
}

#[tokio::test]
async fn address_count_must_match_preset() {
    let mut p = ExperimentPlan::new("local-4", vec![SchemeId::Sg02]);
    p.nodes = vec!["127.0.0.1:1".into()];
    assert!(run_plan_remote(&p).await.is_err());
}
