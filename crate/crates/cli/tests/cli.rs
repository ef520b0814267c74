use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const OVERLAY: &str = r#"
[system]
n_qubits = 2

[training]
n_train = 32
tau = 3
burn_in = 5

[prediction]
n_predict = 8
burn_in = 50
"#;

fn qngrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qngrc")).args(args).output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn error_kind(out: &Output) -> String {
    assert!(!out.status.success());
    json(&out.stderr)["error"]["kind"].as_str().unwrap().to_string()
}

fn run(dir: &Path, cfg: &Path, extra: &[&str], cmd: &str) -> Value {
    let mut args = vec![
        "--profile",
        "ci",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    args.push(cmd);
    let out = qngrc(&args);
    assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    json(&out.stdout)
}

#[test]
fn end_to_end_with_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, OVERLAY).unwrap();
    let out = dir.path().join("run");

    let generated = run(&out, &cfg, &[], "generate");
    assert_eq!(generated["written"].as_array().unwrap().len(), 5);
    let trained = run(&out, &cfg, &[], "train");
    assert!(trained["diagnostics"].is_object());
    let predicted = run(&out, &cfg, &[], "predict");
    assert_eq!(predicted["summary"]["rows"], 8);
    assert!(predicted["summary"]["min_fidelity"].as_f64().unwrap() > 0.99);
    let resolved = std::fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    assert!(resolved.contains("n_train = 32"));

    let metrics = out.join("metrics.csv");
    let report = qngrc(&["report", metrics.to_str().unwrap()]);
    assert!(report.status.success());
    assert_eq!(json(&report.stdout)["summaries"][0]["rows"], 8);

    let it = dir.path().join("iterative");
    for cmd in ["generate", "train", "predict"] {
        run(&it, &cfg, &["--iterative"], cmd);
    }
    let both = qngrc(&[
        "report",
        metrics.to_str().unwrap(),
        it.join("metrics.csv").to_str().unwrap(),
    ]);
    assert_eq!(json(&both.stdout)["comparison"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_quantum_reports_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, OVERLAY).unwrap();
    let v = run(dir.path(), &cfg, &[], "verify-quantum");
    assert_eq!(v["passed"], true);
    assert!(dir.path().join("verify_quantum.json").exists());
}

#[test]
fn errors_are_json_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing-here");
    let out = qngrc(&["--profile", "ci", "--out", missing.to_str().unwrap(), "train"]);
    assert_eq!(error_kind(&out), "io");
    assert!(String::from_utf8_lossy(&out.stderr).contains("train.bin"));

    assert_eq!(error_kind(&qngrc(&["--bogus"])), "usage");
    assert_eq!(error_kind(&qngrc(&["report"])), "usage");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[training]\nm = 0\n").unwrap();
    let out = qngrc(&["--config", bad.to_str().unwrap(), "generate"]);
    assert_eq!(error_kind(&out), "config");
    assert!(String::from_utf8_lossy(&out.stderr).contains("training.m"));

    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "step,fidelity\n").unwrap();
    assert!(!qngrc(&["report", csv.to_str().unwrap()]).status.success());
}

#[test]
fn help_exits_successfully() {
    let out = qngrc(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify-quantum"));
}
