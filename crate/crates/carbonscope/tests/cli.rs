//! End-to-end checks of the binary: exit codes and emitted files.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carbonscope"))
}

#[test]
fn estimate_builtin_emits_breakdown_json() {
    let out = bin()
        .args(["estimate", "--case", "industry_agilex7", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let b = &v["agilex7"];
    // Operational carbon dominates this deployment.
    assert!(b["operational"].as_f64().unwrap() > 10.0 * b["manufacturing"].as_f64().unwrap());
    assert!(b["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_exit_with_code_2() {
    let out = bin()
        .args(["estimate", "--scenario", "/definitely/not/here.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = bin().args(["estimate", "--case", "no_such_case"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_suite_passes_and_exits_zero() {
    let out = bin().args(["validate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("tpu_v4"));
    assert!(text.contains("[ok]"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn sweep_writes_into_out_dir_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "sweep",
            "--case",
            "dnn",
            "--var",
            "n_app",
            "--from",
            "1",
            "--to",
            "8",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sweep_n_app.csv").exists());
    assert!(dir.path().join("sweep_n_app.meta.json").exists());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("crossing at n_app = 3"), "{text}");
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let run = |seed: &[&str]| {
        let mut cmd = bin();
        cmd.args([
            "prob", "--case", "dnn", "--var", "n_app", "--from", "1", "--to", "2", "--points",
            "2", "--n-samples", "200",
        ]);
        cmd.args(seed);
        let dir = tempfile::tempdir().unwrap();
        cmd.arg("--out-dir").arg(dir.path());
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        std::fs::read_to_string(dir.path().join("prob_n_app.csv")).unwrap()
    };
    let default_seed = run(&[]);
    let same_default = run(&["--seed", "0"]);
    let reseeded = run(&["--seed", "1234"]);
    assert_eq!(default_seed, same_default);
    assert_ne!(default_seed, reseeded);
}
