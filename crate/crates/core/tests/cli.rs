use std::path::PathBuf;
use std::process::{Command, Output};

fn treebound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treebound"))
        .args(args)
        .output()
        .expect("run treebound")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("treebound-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn simulate_json_schema_and_prediction() {
    let out = stdout(&treebound(&[
        "simulate", "--protocol", "tree", "--adversary", "preask", "--n", "4", "--m", "4", "--trials", "20000",
        "--seed", "42", "--format", "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected = vec![
        "protocol", "adversary", "n", "m", "trials", "successes", "estimate", "std_error", "predicted", "z",
    ];
    expected.sort();
    assert_eq!(keys, expected);
    assert_eq!(v["predicted"], 0.1875);
    assert!(out.starts_with("{\"protocol\":\"tree\",\"adversary\":\"preask\",\"n\":4"));
}

#[test]
fn same_seed_same_bytes() {
    let args = ["simulate", "--adversary", "random", "--trials", "5000", "--seed", "7", "--format", "csv"];
    assert_eq!(treebound(&args).stdout, treebound(&args).stdout);
    let other = treebound(&["simulate", "--adversary", "random", "--trials", "5000", "--seed", "8", "--format", "csv"]);
    assert_ne!(treebound(&args).stdout, other.stdout);
}

#[test]
fn fail_z_exit_code() {
    let ok = treebound(&["simulate", "--adversary", "none", "--trials", "100", "--fail-z", "3"]);
    assert!(ok.status.success());
    // Jitter leaves the relay adversary without a closed-form prediction.
    let none = treebound(&[
        "simulate", "--adversary", "relay", "--jitter", "0.5", "--trials", "100", "--fail-z", "3",
    ]);
    assert_eq!(none.status.code(), Some(3));
    let without = treebound(&["simulate", "--adversary", "relay", "--jitter", "0.5", "--trials", "100"]);
    assert!(without.status.success());
}

#[test]
fn batches_report_collisions() {
    let out = stdout(&treebound(&["simulate", "-N", "10", "--trials", "2000", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["executions"], 10);
    assert!((v["collision_bound"].as_f64().unwrap() - 90.0 / 512.0).abs() < 1e-12);
}

#[test]
fn analyze_rows() {
    let out = stdout(&treebound(&["analyze", "--n", "1..12", "--m", "eq-n", "--format", "csv"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 13);
    let header: Vec<&str> = lines[0].split(',').collect();
    let bits = header.iter().position(|h| *h == "tree_bits").unwrap();
    let row11: Vec<&str> = lines[11].split(',').collect();
    assert_eq!(row11[0], "11");
    assert_eq!(row11[bits], "8190");

    let out = stdout(&treebound(&["analyze", "--n", "2", "--m", "4", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["tree_relay"], 0.5);
    assert_eq!(v["tree_no_relay"], 1.0 / 64.0);

    assert!(!treebound(&["analyze", "--n", "0"]).status.success());
    assert!(!treebound(&["analyze", "--n", "1", "--m", "5"]).status.success());
}

#[test]
fn honest_trace() {
    let out = stdout(&treebound(&["trace", "--n", "4", "--m", "3", "--l-b", "6", "--seed", "1"]));
    assert_eq!(out.lines().last(), Some("verdict: Accept"));
    let first: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(first["type"], "nonce_a");
    assert_eq!(first["bits"].as_str().unwrap().len(), 7);
    let b: serde_json::Value = serde_json::from_str(out.lines().nth(1).unwrap()).unwrap();
    assert_eq!(b["type"], "nonce_b");
    assert_eq!(b["bits"].as_str().unwrap().len(), 6);
    assert!(out.contains("tree: "));
    assert_eq!(out.lines().filter(|l| l.starts_with("round ")).count(), 4);
}

#[test]
fn preask_trace_shows_probe() {
    for seed in ["1", "2", "3"] {
        let out = stdout(&treebound(&["trace", "--adversary", "preask", "--probe", "ones", "--seed", seed]));
        assert!(out.contains("probe: 1111"));
        assert!(out.lines().any(|l| l.starts_with("first divergence: ")));
        assert!(out.lines().last().unwrap().starts_with("verdict: "));
    }
}

#[test]
fn tree_file_round_trip() {
    let dir = scratch("tree");
    let out = Command::new(env!("CARGO_BIN_EXE_treebound"))
        .args(["trace", "--n", "3", "--seed", "4", "--tree-out", "t.bin"])
        .env("TREEBOUND_OUT_DIR", &dir)
        .output()
        .unwrap();
    let text = stdout(&out);
    let bytes = std::fs::read(dir.join("t.bin")).unwrap();
    assert_eq!(bytes.len(), 4);
    let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
    assert!(text.contains(&format!("tree: {hex}")));

    // Both parties use the loaded tree, so the honest run still passes.
    let replay = Command::new(env!("CARGO_BIN_EXE_treebound"))
        .args(["trace", "--n", "3", "--seed", "9", "--tree-in", "t.bin"])
        .env("TREEBOUND_OUT_DIR", &dir)
        .output()
        .unwrap();
    let text = stdout(&replay);
    assert!(text.contains(&format!("tree: {hex}")));
    assert!(text.ends_with("verdict: Accept\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn out_flag_writes_file() {
    let dir = scratch("out");
    let out = Command::new(env!("CARGO_BIN_EXE_treebound"))
        .args(["simulate", "--trials", "50", "--format", "json", "--out", "r.json"])
        .env("TREEBOUND_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(dir.join("r.json")).unwrap();
    assert!(written.contains("\"successes\":50"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_errors() {
    assert_eq!(treebound(&["simulate", "--n", "0"]).status.code(), Some(1));
    assert_eq!(treebound(&["simulate", "--mode", "quantum"]).status.code(), Some(2));
    assert_eq!(treebound(&["frobnicate"]).status.code(), Some(2));
    let bad = treebound(&["simulate", "--jitter", "-1"]);
    assert!(!bad.status.success());
}
