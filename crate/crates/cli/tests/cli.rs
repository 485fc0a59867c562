use std::fs;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};

fn kbreason(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbreason"))
        .args(args)
        .output()
        .expect("run kbreason")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sister_kb(dir: &Path) -> std::path::PathBuf {
    let kb = dir.join("kb.tsv");
    fs::write(
        &kb,
        "Joseph\tbrother\tRobert\nRobert\tsister\tKatherine\nJoseph\tsister\tKatherine\nDale\tfather\tGeorge\n",
    )
    .unwrap();
    kb
}

fn curate(dir: &Path) -> std::path::PathBuf {
    let split = dir.join("split");
    let out = kbreason(&["curate", "clutrr", "--lengths", "2,3", "--per-length", "4", "--out", p(&split)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    split
}

#[test]
fn curate_then_evaluate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let split = curate(dir.path());
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        format!(r#"{{"split": "{}", "k_values": [1, 3], "noise": {{"rate": 0.1, "base": 200, "seed": 4}}}}"#, p(&split.join("manifest.json"))),
    )
    .unwrap();
    let run = |n: usize| {
        let csv = dir.path().join(format!("a{n}.csv"));
        let json = dir.path().join(format!("a{n}.json"));
        let out = kbreason(&["evaluate", "--config", p(&config), "--out-csv", p(&csv), "--out-json", p(&json)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(csv).unwrap(), fs::read(json).unwrap())
    };
    let first = run(1);
    assert_eq!(first, run(2));
    let csv = String::from_utf8(first.0).unwrap();
    assert!(csv.starts_with("bucket,K,N,strategy,variant,noise_rate,attempts,reach_rate,verified_rate"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let split = curate(dir.path());
    let again = kbreason(&["curate", "clutrr", "--lengths", "2", "--per-length", "2", "--out", p(&split)]);
    assert_eq!(code(&again), 1);
    let forced = kbreason(&["curate", "clutrr", "--lengths", "2", "--per-length", "2", "--out", p(&split), "--force"]);
    assert_eq!(code(&forced), 0, "{}", String::from_utf8_lossy(&forced.stderr));
}

#[test]
fn prove_prints_a_trace_that_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let kb = sister_kb(dir.path());
    let out = kbreason(&["prove", "--kb", p(&kb), "--query", "Joseph sister Katherine", "--backend", "planner=template translator=exact"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(trace["reach"], true);
    assert_eq!(trace["steps"].as_array().unwrap().len(), 2);

    let trace_file = dir.path().join("trace.json");
    fs::write(&trace_file, &out.stdout).unwrap();
    let verify = kbreason(&["verify", "--kb", p(&kb), "--trace", p(&trace_file)]);
    assert_eq!(code(&verify), 0, "{}", String::from_utf8_lossy(&verify.stderr));
    let verdict: serde_json::Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(verdict["reach"], true);
    assert_eq!(verdict["verified"], true);
}

#[test]
fn verify_rejects_a_broken_chain() {
    let dir = tempfile::tempdir().unwrap();
    let kb = sister_kb(dir.path());
    let steps = dir.path().join("steps.tsv");
    fs::write(&steps, "Joseph\tbrother\tRobert\nDale\tfather\tGeorge\n").unwrap();
    let out = kbreason(&["verify", "--kb", p(&kb), "--trace", p(&steps), "--query", "Joseph sister Katherine"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let verdict: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["reach"], false);
    assert_eq!(verdict["verified"], false);
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(code(&kbreason(&["prove", "--no-such-flag"])), 1);
    assert_eq!(code(&kbreason(&["evaluate", "--config", "/nonexistent/run.json"])), 1);
    assert_eq!(code(&kbreason(&["--help"])), 0);
}

#[test]
fn replay_without_fixtures_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let split = curate(dir.path());
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        format!(
            r#"{{"split": "{}", "backend": {{"planner": "replay", "translator": "replay", "fixtures": "missing.json"}}}}"#,
            p(&split.join("manifest.json"))
        ),
    )
    .unwrap();
    let out = kbreason(&["evaluate", "--config", p(&config)]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unreachable_backend_exits_with_two() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let kb = sister_kb(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_kbreason"))
        .args(["prove", "--kb", p(&kb), "--query", "Joseph sister Katherine", "--backend", "planner=remote translator=exact"])
        .env("KBREASON_PLANNER_URL", format!("http://127.0.0.1:{port}/v1"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}
