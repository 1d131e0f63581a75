//! End-to-end checks of the command-line interface.

use std::path::Path;
use std::process::Command;

fn chpair() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chpair"))
}

fn write_config(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

const QUICK_CONFIG: &str = r#"{
  "name": "quick",
  "grid.L": 50.0,
  "grid.n": 256,
  "initial.kind": "gaussian",
  "initial.amplitude": 0.5,
  "step.dt": 0.001,
  "step.t_end": 0.01,
  "step.snapshot_every": 5
}
"#;

#[test]
fn scenarios_list_names_the_catalogue() {
    let out = chpair().args(["scenarios", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["thm22", "thm31", "thm41", "lemmas4", "gaussian-demo"] {
        assert!(text.contains(name), "missing scenario {name}");
    }
}

#[test]
fn scenarios_show_emits_config_json() {
    let out = chpair()
        .args(["scenarios", "show", "thm41"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("show prints valid JSON");
    assert_eq!(json["initial.kind"], "compact_bump");
}

#[test]
fn run_writes_artifacts_and_respects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("quick.json");
    write_config(&config_path, QUICK_CONFIG);
    let out_dir = dir.path().join("results");

    let out = chpair()
        .args(["run", "--config"])
        .arg(&config_path)
        .args(["--override", "grid.n=128"])
        .args(["--override", &format!("output.dir={}", out_dir.display())])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("series.csv").exists());
    assert!(out_dir.join("snapshot_0000.csv").exists());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["reason"], "completed");
    assert_eq!(manifest["config"]["grid.n"], 128);

    // snapshot rows honor the override: 128 nodes + header
    let snap = std::fs::read_to_string(out_dir.join("snapshot_0000.csv")).unwrap();
    assert_eq!(snap.lines().count(), 129);
}

#[test]
fn emit_reruns_a_manifest_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("quick.json");
    write_config(&config_path, QUICK_CONFIG);
    let first = dir.path().join("first");
    let second = dir.path().join("second");

    let out = chpair()
        .args(["run", "--config"])
        .arg(&config_path)
        .args(["--override", &format!("output.dir={}", first.display())])
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = chpair()
        .args(["emit", "--manifest"])
        .arg(first.join("manifest.json"))
        .args(["--out"])
        .arg(&second)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    for name in ["series.csv", "snapshot_0000.csv", "snapshot_0002.csv"] {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs after re-run");
    }
}

#[test]
fn invalid_support_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.json");
    write_config(
        &config_path,
        r#"{
  "grid.n": 256,
  "initial.kind": "compact_bump",
  "initial.support_a": -20.0,
  "initial.support_b": 20.0,
  "step.dt": 0.001,
  "step.t_end": 0.01
}
"#,
    );
    let out = chpair()
        .args(["run", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("configuration error"), "stderr: {err}");
}

#[test]
fn unknown_suite_is_rejected() {
    let out = chpair().args(["verify", "bogus"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn run_without_source_is_an_error() {
    let out = chpair().args(["run"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
