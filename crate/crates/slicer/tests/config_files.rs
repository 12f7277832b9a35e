use std::fs;

use slicer::config::CONFIG_SCHEMA;
use slicer::{load_config, parse_config, HarnessError, Profile, ScenarioConfig};
use slicer_core::env::EnvConfig;

fn key_of(text: &str) -> String {
    match parse_config(text, Profile::Desk) {
        Err(e) => e
            .config_key()
            .map(str::to_string)
            .unwrap_or_else(|| format!("<{e}>")),
        Ok(_) => panic!("{text} was accepted"),
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    fs::write(
        &p,
        r#"{"qos": {"d_max_ms": 10.0, "epsilon": 0.3}, "run": {"seed": 4}}"#,
    )
    .unwrap();
    let cfg = load_config(&p, Profile::Desk).unwrap();
    assert_eq!(cfg.qos.epsilon, 0.3);
    assert_eq!(cfg.d_max_ttis().unwrap(), 10);
    assert_eq!(cfg.run.seed, 4);
    assert_eq!(cfg.schema_version, CONFIG_SCHEMA);

    let q = dir.path().join("full.json");
    fs::write(&q, cfg.to_canonical_json()).unwrap();
    assert_eq!(load_config(&q, Profile::Desk).unwrap(), cfg);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_config(std::path::Path::new("/nonexistent/x.json"), Profile::Desk).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
}

#[test]
fn invalid_values_name_their_key() {
    assert_eq!(key_of(r#"{"qos": {"epsilon": 1.5}}"#), "qos.epsilon");
    assert_eq!(key_of(r#"{"qos": {"d_max_ms": -1}}"#), "qos.d_max_ms");
    assert_eq!(
        key_of(r#"{"env": {"prb_min": 20, "prb_max": 10}}"#),
        "env.prb_min"
    );
    assert_eq!(key_of(r#"{"env": {"slot_ttis": 0}}"#), "env.slot_ttis");
    assert_eq!(
        key_of(r#"{"env": {"load_pattern": {"peak_multiplier": 0.5}}}"#),
        "env.load_pattern.peak_multiplier"
    );
    assert_eq!(
        key_of(r#"{"radio": {"noise_watts": 0}}"#),
        "radio.noise_watts"
    );
    assert_eq!(
        key_of(
            r#"{"users": [{"doppler_hz": 5, "snr_db": 30, "rate": -2, "size_class": "small"}]}"#
        ),
        "users[0].rate"
    );
    assert_eq!(key_of(r#"{"users": []}"#), "users");
    assert_eq!(key_of(r#"{"reward": {"kind": "banana"}}"#), "reward.kind");
    assert_eq!(key_of(r#"{"agent": {"hidden": [0]}}"#), "agent.hidden");
    assert_eq!(
        key_of(r#"{"study": {"methods": ["fedavg", "nope"]}}"#),
        "study.methods[1]"
    );
}

#[test]
fn unknown_and_mistyped_keys_are_rejected() {
    assert_eq!(
        key_of(r#"{"radio": {"tx_powr_watts": 1}}"#),
        "radio.tx_powr_watts"
    );
    assert_eq!(key_of(r#"{"run": {"seed": "seven"}}"#), "run.seed");
    assert!(matches!(
        parse_config("[1, 2]", Profile::Desk),
        Err(HarnessError::Config { .. })
    ));
    assert!(matches!(
        parse_config("{", Profile::Desk),
        Err(HarnessError::Json(_))
    ));
}

#[test]
fn default_scenario_is_the_desk_env1_setup() {
    let cfg = ScenarioConfig::default();
    assert_eq!(cfg.env_config().unwrap(), EnvConfig::desk_env1());
}

#[test]
fn profiles_differ_in_scale_only() {
    let desk = ScenarioConfig::for_profile(Profile::Desk);
    let paper = ScenarioConfig::for_profile(Profile::Paper);
    assert_eq!(desk.env.slot_ttis, 200);
    assert_eq!(paper.env.slot_ttis, 1000);
    assert_eq!(desk.qos, paper.qos);
    assert_eq!(desk.users.len(), paper.users.len());
    assert!(paper.run.steps > desk.run.steps);
    assert_eq!("paper".parse::<Profile>().unwrap(), Profile::Paper);
    assert!("huge".parse::<Profile>().is_err());
}

#[test]
fn null_zeta_p_tracks_epsilon() {
    let a = parse_config(r#"{"qos": {"epsilon": 0.3}}"#, Profile::Desk).unwrap();
    let b = parse_config(
        r#"{"qos": {"epsilon": 0.3}, "reward": {"zeta_p": 60.0}}"#,
        Profile::Desk,
    )
    .unwrap();
    assert!((a.shaped_coeffs().zeta_p - 20.0).abs() < 1e-12);
    assert_eq!(b.shaped_coeffs().zeta_p, 60.0);
}
