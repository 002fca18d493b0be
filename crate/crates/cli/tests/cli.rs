//! Exit-code contract and output-shape tests for the command line.

use assert_cmd::Command;
use predicates::prelude::*;

fn quenchlab() -> Command {
    Command::cargo_bin("quenchlab").unwrap()
}

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn pressure_emits_json_record() {
    quenchlab()
        .args(["pressure", "--config", &config("ferro_chain_n4.json")])
        .assert()
        .success()
        .stdout(predicate::str::contains("\"command\":\"pressure\""))
        .stdout(predicate::str::contains("\"config_hash\""))
        .stdout(predicate::str::contains("\"tool_version\""));
}

#[test]
fn quenched_exact_on_rademacher_config() {
    quenchlab()
        .args(["quenched", "--config", &config("rademacher_chain_n6.json")])
        .assert()
        .success()
        .stdout(predicate::str::contains("\"exact\":true"));
}

#[test]
fn verify_passes_on_bundled_configs() {
    for name in ["ferro_chain_n4.json", "rademacher_chain_n6.json"] {
        quenchlab().args(["verify", "--config", &config(name)]).assert().success();
    }
}

#[test]
fn missing_file_is_io_error() {
    quenchlab()
        .args(["pressure", "--config", "/nonexistent/nope.json"])
        .assert()
        .code(4);
}

#[test]
fn malformed_json_is_config_error() {
    let dir = std::env::temp_dir().join("quenchlab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    quenchlab()
        .args(["pressure", "--config", path.to_str().unwrap()])
        .assert()
        .code(2);
}

#[test]
fn exact_quenched_on_continuous_disorder_is_config_error() {
    // gaussian disorder has no finite outcome space; without a sample count,
    // exact enumeration is requested and refused
    let dir = std::env::temp_dir().join("quenchlab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gaussian_no_samples.json");
    std::fs::write(
        &path,
        r#"{
            "model": {
                "dimension": 1,
                "orbits": [
                    { "sites": [[0], [1]], "distribution": { "kind": "gaussian", "sd": 1.0 } }
                ]
            },
            "region": { "box_side": 4 }
        }"#,
    )
    .unwrap();
    quenchlab().args(["quenched", "--config", path.to_str().unwrap()]).assert().code(2);
}

#[test]
fn oversized_region_is_capacity_error() {
    let dir = std::env::temp_dir().join("quenchlab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("huge.json");
    std::fs::write(
        &path,
        r#"{
            "model": {
                "dimension": 1,
                "orbits": [
                    { "sites": [[0], [1]], "distribution": { "kind": "deterministic", "value": 1.0 } }
                ]
            },
            "region": { "box_side": 33 }
        }"#,
    )
    .unwrap();
    quenchlab().args(["pressure", "--config", path.to_str().unwrap()]).assert().code(3);
}

#[test]
fn explicitly_requested_inapplicable_check_is_config_error() {
    // griffiths needs deterministic couplings; this config is random
    quenchlab()
        .args([
            "verify",
            "--config",
            &config("rademacher_chain_n6.json"),
            "--checks",
            "griffiths",
        ])
        .assert()
        .code(2);
}

#[test]
fn unknown_check_name_is_config_error() {
    quenchlab()
        .args(["verify", "--config", &config("ferro_chain_n4.json"), "--checks", "bogus"])
        .assert()
        .code(2);
}

#[test]
fn limit_writes_csv_table() {
    let dir = std::env::temp_dir().join("quenchlab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("table.csv");
    quenchlab()
        .args([
            "limit",
            "--config",
            &config("ferro_chain_n4.json"),
            "--out",
            out.to_str().unwrap(),
        ])
        .assert()
        .success();
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("n,pressure,std_error,exact,bound\n"));
    assert_eq!(csv.lines().count(), 5, "header plus four rows");
}

#[test]
fn truncation_sweep_runs_on_pareto_config() {
    quenchlab()
        .args([
            "truncation",
            "--config",
            &config("pareto_chain_n6.json"),
            "--samples",
            "500",
        ])
        .assert()
        .success()
        .stdout(predicate::str::contains("\"passed\":true"));
}

#[test]
fn seed_override_changes_the_payload() {
    let base = quenchlab()
        .args(["quenched", "--config", &config("gaussian_chain_n6.json"), "--samples", "200"])
        .output()
        .unwrap();
    let overridden = quenchlab()
        .args([
            "quenched",
            "--config",
            &config("gaussian_chain_n6.json"),
            "--samples",
            "200",
            "--seed",
            "12345",
        ])
        .output()
        .unwrap();
    assert!(base.status.success() && overridden.status.success());
    assert_ne!(base.stdout, overridden.stdout);
}
