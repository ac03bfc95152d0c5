use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn germeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_germeq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn schema_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json")
}

fn validated(out: &Output) -> Value {
    let report: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path()).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
    report
}

#[test]
fn check_cubic_passes_with_three_sixteenths() {
    let out = germeq(&["check", "--f", "x1^2", "--g", "x1^2 + 0.25*x1^3", "--n", "1", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = validated(&out);
    assert_eq!(rep["verdict"], "PASS");
    assert!((rep["c_estimate"].as_f64().unwrap() - 0.1875).abs() < 1e-12);
    assert_eq!(rep["records"].as_array().unwrap().len(), 2);
    assert_eq!(rep["config"]["sampling"]["seed"], 0);
}

#[test]
fn verify_identity_has_zero_residual() {
    let out = germeq(&["verify", "--f", "x1^2", "--g", "x1^2", "--n", "1", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = validated(&out);
    assert_eq!(rep["verdict"], "PASS");
    assert_eq!(rep["max_residual"].as_f64(), Some(0.0));
    assert_eq!(rep["details"]["displacement"]["kind"], "identity_within_noise");
}

#[test]
fn check_divergent_pair_fails() {
    let out = germeq(&["check", "--f", "x1^2", "--g", "2*x1^2", "--n", "1", "--r", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(validated(&out)["verdict"], "FAIL");
}

#[test]
fn verify_radial_fixture() {
    let out = germeq(&["verify", "--f", "x1^2 + x2^2", "--g", "x1^2 + x2^2 + (x1^2 + x2^2)^2", "--n", "2"]);
    // powers of parenthesised sums are not part of the input language
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parsing g"));

    let out = germeq(&[
        "verify", "--f", "x1^2 + x2^2", "--g", "x1^2 + x2^2 + x1^4 + 2*x1^2*x2^2 + x2^4", "--n", "2", "--shells", "4",
        "--points-per-shell", "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = validated(&out);
    assert!(rep["max_residual"].as_f64().unwrap() <= 1e-8);
    assert!(rep["conservation_drift"].as_f64().unwrap() <= 1e-9);
    assert!(rep["details"]["round_trip_error"].as_f64().unwrap() <= 1e-7);
    assert!(rep["details"]["min_jacobian_det"].as_f64().unwrap() > 0.0);
}

#[test]
fn check0_and_distbound() {
    let out = germeq(&["check0", "--f", "x1^2", "--g", "x1^2 + x1^4", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = validated(&out);
    assert_eq!(rep["verdict"], "PASS");
    assert!(rep["details"]["c_prime_estimate"].as_f64().is_some());

    let out = germeq(&["distbound", "--f", "x1^2 + x2^2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = validated(&out);
    assert!((rep["details"]["a_estimate"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn loja_reports_exponents() {
    let out = germeq(&["loja", "--f", "x1^3", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = validated(&out);
    assert!((rep["eta"].as_f64().unwrap() - 2.0 / 3.0).abs() < 0.05);
    assert!(rep.get("verdict").is_none());

    let out = germeq(&["loja", "--f", "x1^2", "--g", "x1^2 + 0.25*x1^3", "--n", "1"]);
    let rep = validated(&out);
    assert!(rep["details"]["delta"].as_f64().unwrap() <= 0.05);
}

#[test]
fn genpair_emits_polynomials() {
    let out = germeq(&["genpair", "--f", "x1^2", "--n", "1", "--r", "1", "--multipliers", "1/32"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = validated(&out);
    assert_eq!(rep["details"]["g"], "x1^2 + 1/4*x1^3");
    assert_eq!(rep["details"]["generators"][0]["generator"], "8*x1^3");

    let out = germeq(&["genpair", "--f", "x1^2 + x2^2", "--n", "2", "--format", "csv", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("kind,index,word,polynomial\ng,0,,x1^2 + x2^2"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("generator,")).count(), 4);

    let out = germeq(&["genpair", "--f", "x1^2", "--n", "1", "--multipliers", "1;2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_dumps_trajectories() {
    let out = germeq(&[
        "flow", "--f", "x1^2", "--g", "x1^2 + 0.25*x1^3", "--n", "1", "--point", "0.1", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sample,t,y1,F,W_norm"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(last[1], 1.0);
    assert!((last[2] - 0.098787567242829).abs() < 1e-9);
    assert!((last[3] - 0.01).abs() < 1e-12);

    let out = germeq(&["flow", "--f", "x1^2", "--g", "x1^2 + 0.25*x1^3", "--n", "1", "--point", "0.1", "--inverse"]);
    let rep = validated(&out);
    assert_eq!(rep["details"]["direction"], "INVERSE");
    let end = rep["details"]["trajectories"][0]["y_nodes"].as_array().unwrap().last().unwrap()[0].as_f64().unwrap();
    // ψ(0.1) solves s² = 0.1² + 0.1³/4
    assert!((end - (0.01f64 + 0.00025).sqrt()).abs() < 1e-9);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{ "f": "x1^2", "g": "x1^2 + 0.25*x1^3", "n": 1, "sampling": { "shells": 4, "seed": 11 } }"#,
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let out = germeq(&[
        "check", "--config", cfg.to_str().unwrap(), "--seed", "12", "--output", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["config"]["sampling"]["shells"], 4);
    assert_eq!(rep["config"]["sampling"]["seed"], 12);
    assert_eq!(rep["config"]["sampling"]["points_per_shell"], 16);

    // the report's config replays to the same numbers
    let replay = dir.path().join("replay.json");
    let mut config = rep["config"].clone();
    config.as_object_mut().unwrap().remove("output");
    std::fs::write(&replay, config.to_string()).unwrap();
    let again = germeq(&["check", "--config", replay.to_str().unwrap()]);
    let rep2: Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(rep2["records"], rep["records"]);
    assert_eq!(rep2["c_estimate"], rep["c_estimate"]);

    std::fs::write(&cfg, r#"{ "command": "flow", "f": "x1^2", "n": 1 }"#).unwrap();
    let out = germeq(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["check", "--f", "x1^2", "--n", "1"][..],
        &["check", "--f", "x1^2 + 1", "--g", "x1^2", "--n", "1"],
        &["check", "--f", "x1^2", "--g", "x1^2 + x3", "--n", "2"],
        &["verify", "--f", "x1", "--g", "x1", "--n", "1"],
        &["check", "--f", "x1^2", "--g", "x1^2", "--n", "1", "--r", "0"],
    ] {
        let out = germeq(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    // clap rejects unknown flags with its own code 2
    assert_eq!(germeq(&["check", "--bogus"]).status.code(), Some(2));
}

#[test]
fn csv_reports() {
    let out = germeq(&["check", "--f", "x1^2", "--g", "x1^2 + 0.25*x1^3", "--n", "1", "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("shell_radius,x1,ratio_m0,ratio_m1\n"));
    assert_eq!(csv.lines().count(), 1 + 12 * 16);

    let out = germeq(&["verify", "--f", "x1^2", "--g", "x1^2 + 0.25*x1^3", "--n", "1", "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("x1,phi1,residual,drift\n"));
}
