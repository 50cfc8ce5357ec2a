use std::path::Path;
use std::process::Command;

fn deal(out: &Path, extra: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_deal"))
        .args(["--scheme", "BLS04", "--n", "4", "--t", "1", "--seed", "00c0ffee", "--out"])
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn dealer_writes_one_file_per_party_plus_public() {
    let dir = tempfile::tempdir().unwrap();
    let out = deal(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = listing(dir.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        [
            "bls04.party-1.json",
            "bls04.party-2.json",
            "bls04.party-3.json",
            "bls04.party-4.json",
            "bls04.public.json"
        ]
    );
    let again = tempfile::tempdir().unwrap();
    assert!(deal(again.path(), &[]).status.success());
    assert_eq!(listing(dir.path()), listing(again.path()));
}

#[test]
fn dealer_auth_and_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    assert!(deal(dir.path(), &["--auth", "--key-id", "sig"]).status.success());
    assert_eq!(listing(dir.path()).len(), 9);
    assert!(dir.path().join("sig.public.json").exists());
    assert!(dir.path().join("auth.party-4.json").exists());

    let bad = deal(dir.path(), &["--key-id", "../x"]);
    assert!(!bad.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_deal"))
        .args(["--scheme", "BLS04", "--n", "4", "--t", "4", "--seed", "01", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn node_refuses_missing_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tcs_network::Preset::named("local-4").unwrap().net_config(1, 20000, tcs_network::Mode::Sockets);
    let path = dir.path().join("node.json");
    std::fs::write(&path, cfg.to_json_pretty()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_node"))
        .arg("--config")
        .arg(&path)
        .arg("--keys")
        .arg(dir.path().join("missing"))
        .env("TCS_LOG", "off")
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn bench_run_and_replay_agree() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"preset": "local-4", "schemes": ["BLS04"], "rates": [1, 2], "duration_s": 2, "seed": 1}"#,
    )
    .unwrap();
    let run = dir.path().join("run");
    let rec = dir.path().join("rec.json");
    let out = Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(["run", "--plan"])
        .arg(&plan)
        .arg("--out")
        .arg(&run)
        .arg("--record")
        .arg(&rec)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("BLS04: knee"));
    let replay = dir.path().join("replay");
    let out = Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(["replay", "--recording"])
        .arg(&rec)
        .arg("--out")
        .arg(&replay)
        .output()
        .unwrap();
    assert!(out.status.success());
    for f in ["metrics.csv", "nodes.csv", "capacity.csv", "percentiles.svg", "throughput_latency.svg"] {
        assert_eq!(std::fs::read(run.join(f)).unwrap(), std::fs::read(replay.join(f)).unwrap(), "{f}");
    }
}
