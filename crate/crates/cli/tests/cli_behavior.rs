//! CLI contract: exit codes, config rejection, report pass-through, and the
//! designed negative control.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_horolab"))
}

#[test]
fn malformed_json_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{not json").unwrap();
    let out_dir = dir.path().join("out");
    let output = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    assert!(
        !out_dir.join("report.json").exists(),
        "partial output written for a malformed config"
    );
}

#[test]
fn unknown_experiment_id_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"kind":"constant_diag","eigenvalues":[-1.0]},"experiment":"not_a_thing"}"#,
    )
    .unwrap();
    let output = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn nonpositive_tolerance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"kind":"constant_diag","eigenvalues":[-1.0]},
            "experiment":"stable_limit","params":{"tol":-1.0}}"#,
    )
    .unwrap();
    let output = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn asymptotic_forms_report_pass_through() {
    // config {model: constant_diag[-1], experiment: asymptotic_forms}
    // reports h = 1 and det D = 2
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"kind":"constant_diag","eigenvalues":[-1.0]},
            "experiment":"asymptotic_forms"}"#,
    )
    .unwrap();
    let output = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let constants = &report["reports"][0]["constants"];
    assert!((constants["h"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((constants["det_d"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn cheeger_limit_on_rank_one_model() {
    // config {model: constant_diag[-4,-1,-1], experiment: cheeger_limit,
    // r_max: 20} reports g(20) ~ 4
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"kind":"constant_diag","eigenvalues":[-4.0,-1.0,-1.0]},
            "experiment":"cheeger_limit","params":{"r_max":20.0}}"#,
    )
    .unwrap();
    let output = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let g = report["reports"][0]["constants"]["g_final"].as_f64().unwrap();
    assert!((g - 4.0).abs() < 1e-2, "g(20) = {g}");
    // the volumes table is a CSV with the documented columns
    let csv = std::fs::read_to_string(dir.path().join("volumes.csv")).unwrap();
    assert!(csv.starts_with("r,sphere_vol,ball_vol,ratio_e_hr,g_r,quad_err"));
}

#[test]
fn numerical_failure_exits_3_with_partial_report() {
    // a conjugate point inside the boundary problem is a numerical failure
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"kind":"constant_diag","eigenvalues":[1.0]},
            "experiment":"boundary_tensor_s","params":{"r":3.141592653589793}}"#,
    )
    .unwrap();
    let output = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    assert!(dir.path().join("report.json").exists(), "partial report missing");
}

#[test]
fn direct_subcommand_mirrors_op() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(&model, r#"{"kind":"constant_diag","eigenvalues":[-1.0]}"#).unwrap();
    let output = bin()
        .args(["stable-limit", "--model"])
        .arg(&model)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("PASS stable_limit"), "stdout: {stdout}");
}

#[test]
fn injected_flat_control_fails_with_claim_tag() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args([
            "suite",
            "paper-verification",
            "--inject",
            "flat-rank-one",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "expected verification failure");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("FAIL") && stdout.contains("injected flat control"),
        "stdout: {stdout}"
    );
    // the failing line carries its claim citation string
    assert!(stdout.contains("rank detection from growth"), "stdout: {stdout}");
}
