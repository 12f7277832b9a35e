use std::fs;
use std::path::Path;

use slicer::artifacts::{verify_run_dir, RunManifest, RunStatus, TRAINING_COLUMNS};
use slicer::checkpoint::load_checkpoint;
use slicer::runs::{
    run_comparison, run_gen_suite, run_personalization, run_reward_sweep, run_training, MODEL_FILE,
    SHAPE_REPORT, SUITE_FILE, SWEEP_CSV, TRAINING_CSV,
};
use slicer::suite::EnvSuite;
use slicer::{parse_config, Profile, Rayon, ScenarioConfig};
use slicer_core::compare::PolicyKind;

fn short(extra: &str) -> ScenarioConfig {
    let base = r#"{"run": {"steps": 80, "seed": 17}}"#;
    let mut cfg = parse_config(base, Profile::Desk).unwrap();
    if !extra.is_empty() {
        let overlay: serde_json::Value = serde_json::from_str(extra).unwrap();
        let mut v = serde_json::to_value(&cfg).unwrap();
        merge(&mut v, overlay);
        cfg = parse_config(&v.to_string(), Profile::Desk).unwrap();
    }
    cfg
}

fn merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn training_is_bit_reproducible() {
    let cfg = short("");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_training(&cfg, Profile::Desk, a.path()).unwrap();
    run_training(&cfg, Profile::Desk, b.path()).unwrap();
    for f in [
        TRAINING_CSV,
        MODEL_FILE,
        "config.json",
        "training_summary.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn different_seeds_give_different_logs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_training(&short(""), Profile::Desk, a.path()).unwrap();
    run_training(&short(r#"{"run": {"seed": 18}}"#), Profile::Desk, b.path()).unwrap();
    assert_ne!(
        fs::read(a.path().join(TRAINING_CSV)).unwrap(),
        fs::read(b.path().join(TRAINING_CSV)).unwrap()
    );
}

#[test]
fn training_csv_has_one_row_per_slot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_training(&short(""), Profile::Desk, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join(TRAINING_CSV)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRAINING_COLUMNS.join(","));
    assert_eq!(lines.count(), 80);
    assert_eq!(out.records.len(), 80);
    assert_eq!(out.summary.trailing_slots, 80);
    assert!((0.0..=1.0).contains(&out.summary.p_sat));
}

#[test]
fn manifest_verifies_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    run_training(&short(""), Profile::Desk, dir.path()).unwrap();
    let m = verify_run_dir(dir.path()).unwrap();
    assert_eq!(m.status, RunStatus::Complete);
    assert_eq!(m.command, "train");
    assert_eq!(m.seed, 17);
    assert_eq!(m.metrics_start.as_deref(), Some(TRAINING_CSV));
    for f in &m.files {
        assert!(dir.path().join(f).exists(), "{f} listed but missing");
    }

    let cpath = dir.path().join("config.json");
    let text = fs::read_to_string(&cpath)
        .unwrap()
        .replace("\"seed\": 17", "\"seed\": 99");
    fs::write(&cpath, text).unwrap();
    assert!(verify_run_dir(dir.path()).is_err());
}

#[test]
fn checkpoint_from_run_reloads_the_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short("");
    let out = run_training(&cfg, Profile::Desk, dir.path()).unwrap();
    let (ck, model) = load_checkpoint(&dir.path().join(MODEL_FILE)).unwrap();
    assert_eq!(model, out.model);
    assert_eq!(ck.metadata.seed, 17);
    assert_eq!(ck.metadata.steps, 80);
    assert_eq!(ck.metadata.actions, cfg.agent.actions);
    assert_eq!(ck.metadata.algorithm, "pg");
}

#[test]
fn dqn_training_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(r#"{"agent": {"algorithm": "dqn", "dqn": {"batch": 8}}}"#);
    let out = run_training(&cfg, Profile::Desk, dir.path()).unwrap();
    assert_eq!(out.summary.algorithm, "dqn");
    let (ck, _) = load_checkpoint(&dir.path().join(MODEL_FILE)).unwrap();
    assert_eq!(ck.metadata.algorithm, "dqn");
}

#[test]
fn failed_run_leaves_a_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(r#"{"study": {"suite_size": 1, "train_slots": 10}}"#);
    assert!(run_personalization(&cfg, Profile::Desk, dir.path(), &Rayon).is_err());
    let m = manifest(dir.path());
    assert_eq!(m.status, RunStatus::Partial);
    assert!(m.error.is_some());
    assert!(m.files.iter().any(|f| f == SUITE_FILE));
}

#[test]
fn small_sweep_writes_a_row_per_grant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(r#"{"env": {"prb_max": 40, "initial_prbs": 10}, "sweep": {"slots": 20}}"#);
    let out = run_reward_sweep(&cfg, Profile::Desk, dir.path(), &Rayon).unwrap();
    assert_eq!(out.points.len(), 41);
    let text = fs::read_to_string(dir.path().join(SWEEP_CSV)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "schema_version,n_prbs,p_sat,mean_delay,lln_reward,shaped_reward"
    );
    assert_eq!(lines.count(), 41);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join(SHAPE_REPORT)).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(out.report.pass));
    assert_eq!(report["lambda"].as_f64().unwrap(), out.lambda);
}

#[test]
fn sweep_without_calibration_uses_the_configured_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(
        r#"{"env": {"prb_max": 20, "initial_prbs": 10}, "sweep": {"slots": 5, "calibrate_lambda": false}, "reward": {"lambda": 7.5}}"#,
    );
    let out = run_reward_sweep(&cfg, Profile::Desk, dir.path(), &Rayon).unwrap();
    assert!(!out.lambda_calibrated);
    assert_eq!(out.lambda, 7.5);
}

#[test]
fn comparison_writes_all_five_policies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        short(r#"{"compare": {"train_slots": 40, "eval_slots": 40, "calibration_slots": 1000}}"#);
    let report = run_comparison(&cfg, Profile::Desk, dir.path(), &Rayon).unwrap();
    assert_eq!(report.rows.len(), 5);
    let text = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let names: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    let expected: Vec<&str> = PolicyKind::ALL.iter().map(|p| p.name()).collect();
    assert_eq!(names, expected);
    verify_run_dir(dir.path()).unwrap();
}

#[test]
fn gen_suite_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short("");
    let suite = run_gen_suite(&cfg, Profile::Desk, dir.path(), 4).unwrap();
    let back: EnvSuite =
        serde_json::from_str(&fs::read_to_string(dir.path().join(SUITE_FILE)).unwrap()).unwrap();
    assert_eq!(back, suite);
    assert_eq!(back.master_seed, 17);
    for m in &back.members {
        m.validate().unwrap();
    }
}

#[test]
fn tiny_personalization_study_writes_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(
        r#"{"study": {"suite_size": 3, "train_slots": 20, "t_episodes": 1, "episode_slots": 10, "methods": ["fedavg", "reward"]}}"#,
    );
    let out = run_personalization(&cfg, Profile::Desk, dir.path(), &Rayon).unwrap();
    assert_eq!(out.report.methods.len(), 2);
    for f in [
        "r_hat.csv",
        "alpha_fedavg.csv",
        "alpha_reward.csv",
        "personalization_report.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let alpha = fs::read_to_string(dir.path().join("alpha_fedavg.csv")).unwrap();
    assert_eq!(alpha.lines().count(), 4);
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("personalization_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        report["local"]["mean"].as_f64().unwrap(),
        out.report.local_mean
    );
    assert_eq!(manifest(dir.path()).status, RunStatus::Complete);
}
