use std::fs;
use std::process::Command;

use slicer::artifacts::verify_run_dir;

fn slicer() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slicer"))
}

#[test]
fn validate_config_prints_the_resolved_scenario() {
    let out = slicer()
        .args(["validate-config", "--seed", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["run"]["seed"], 5);
    assert_eq!(v["env"]["slot_ttis"], 200);
}

#[test]
fn paper_profile_is_selectable() {
    let out = slicer()
        .args(["validate-config", "--profile", "paper"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["env"]["slot_ttis"], 1000);
}

#[test]
fn bad_config_fails_with_the_key_name() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"qos": {"epsilon": 2.0}}"#).unwrap();
    let out = slicer()
        .args(["validate-config", "--config", p.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("qos.epsilon"));
}

#[test]
fn train_writes_a_verifiable_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"run": {"steps": 30}}"#).unwrap();
    let run = dir.path().join("run");
    let out = slicer()
        .args([
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "3",
            "--out",
            run.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = verify_run_dir(&run).unwrap();
    assert_eq!(m.seed, 3);
    assert!(run.join("training.csv").exists());
}

#[test]
fn gen_suite_takes_a_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = slicer()
        .args([
            "gen-suite",
            "--n",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("suite.json")).unwrap()).unwrap();
    assert_eq!(v["members"].as_array().unwrap().len(), 3);
}

#[test]
fn unknown_subcommand_is_rejected() {
    assert!(!slicer().arg("fly").output().unwrap().status.success());
}
