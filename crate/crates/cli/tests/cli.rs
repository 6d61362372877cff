//! End-to-end command tests: exit codes, report shapes, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_esrsim"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn ground_config(dir: &Path) -> PathBuf {
    write(
        dir,
        "ground.json",
        r#"{
  "layout": {"spins": 3},
  "thermal": {"x": "inf"},
  "mode": "exact",
  "thresholds": {}
}"#,
    )
}

fn json_of(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn run_turn_on_reports_half_signal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let program = write(dir.path(), "p.pulse", "turnon\n");
    let out = bin()
        .args(["run"])
        .arg(&program)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    let line = &report["final"]["lines"]["1:0"];
    let magnitude = (line["re"].as_f64().unwrap().powi(2) + line["im"].as_f64().unwrap().powi(2)).sqrt();
    assert!((magnitude - 0.5).abs() < 1e-12);
    assert_eq!(report["final"]["pulse_count"], 1);
    assert_eq!(report["program"]["expanded"][0], "pulse 1 0 1/2pi 0");
}

#[test]
fn run_echo_block_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let program = write(dir.path(), "p.pulse", "turnon\ngrad +\npi 1 0\ngrad +\n");
    let out = bin()
        .args(["run"])
        .arg(&program)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = json_of(&out);
    let snaps = report["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 1);
    assert_eq!(snaps[0]["gradients_applied"], 2);
}

#[test]
fn malformed_program_is_usage_error_with_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let program = write(dir.path(), "bad.pulse", "pi 3 102\nbogus\n");
    let out = bin()
        .args(["run"])
        .arg(&program)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn unknown_config_key_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"layout": {"spins": 3}, "wibble": 1}"#,
    );
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wibble"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let program = write(dir.path(), "p.pulse", "turnon\ngrad +\nprepare\ngrad +\n");
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run"])
            .arg(&program)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "reports differ between identical runs");
}

#[test]
fn spectrum_emits_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out_path = dir.path().join("spectrum.json");
    let status = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["addressability"]["addressable"], true);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("spin,cond,frequency\n"));
    // 3 spins: two edge spins with 2 lines, one interior with 4
    assert_eq!(csv.lines().count(), 1 + 8);
}

#[test]
fn shor_periodic_finds_period() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out = bin()
        .args([
            "shor", "--w-bits", "4", "--period", "4", "--strategy", "exhaustive_scan",
            "--config",
        ])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    let s = &report["strategies"][0];
    assert_eq!(s["outcome"]["outcome"], "found");
    assert_eq!(s["outcome"]["value"], 4);
    assert_eq!(report["state"]["terms"], 4);
}

#[test]
fn shor_shifted_state_norm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out = bin()
        .args([
            "shor", "--w-bits", "4", "--x", "2", "--modulus", "15", "--config",
        ])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = json_of(&out);
    let norm = report["state"]["norm"].as_f64().unwrap();
    assert!((norm - 1.0).abs() < 1e-12);
    assert_eq!(report["state"]["total_register_bits"], 8);
}

#[test]
fn shor_non_coprime_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out = bin()
        .args([
            "shor", "--w-bits", "4", "--x", "6", "--modulus", "15", "--config",
        ])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grover_recovers_answer_and_probe() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out = bin()
        .args(["grover", "--answer", "101101", "--weight", "0.9", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = json_of(&out);
    assert_eq!(report["readout"]["recovered"], "101101");
    assert_eq!(report["readout"]["matches_answer"], true);
    assert_eq!(report["probe"]["decoded"], "101101");
    assert!(report["readout"]["pulse_constant"].as_f64().unwrap() <= 3.0);
}

#[test]
fn grover_ambiguity_reported_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out = bin()
        .args(["grover", "--answer", "1011", "--weight", "0.51", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "ambiguity is an in-band outcome");
    let report = json_of(&out);
    assert!(report["readout"]["error"].as_str().unwrap().contains("dominant"));
}

#[test]
fn verify_self_check_detects_injection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out = bin()
        .args(["verify", "--self-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = json_of(&out);
    assert_eq!(report["self_check"]["detected"], true);
}

#[test]
fn verify_full_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let out_path = dir.path().join("verify.json");
    let out = bin()
        .args(["verify", "--seed", "7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["verify"]["pass"], true);
    let suites = report["verify"]["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 5);
    for suite in suites {
        assert!(suite["cases"].as_u64().unwrap() > 0);
    }
    // the basis-mapping table of the preparation sequence rides along as CSV
    let csv = std::fs::read_to_string(dir.path().join("verify.prepare_truth.csv")).unwrap();
    assert!(csv.starts_with("basis_in,basis_out,phase_re,phase_im\n"));
    assert_eq!(csv.lines().count(), 1 + 64);
}

#[test]
fn sampled_mode_override_matches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ground_config(dir.path());
    let program = write(dir.path(), "p.pulse", "turnon\ngrad +\nprepare\ngrad +\n");
    let run = |mode: Option<&str>| {
        let mut cmd = bin();
        cmd.args(["run"]).arg(&program).arg("--config").arg(&cfg);
        if let Some(m) = mode {
            cmd.args(["--mode", m]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        json_of(&out)
    };
    let exact = run(None);
    let sampled = run(Some("sampled:17"));
    for key in ["1:0", "1:1", "2:10"] {
        let a = &exact["final"]["lines"][key];
        let b = &sampled["final"]["lines"][key];
        let d = (a["re"].as_f64().unwrap() - b["re"].as_f64().unwrap()).abs()
            + (a["im"].as_f64().unwrap() - b["im"].as_f64().unwrap()).abs();
        assert!(d < 1e-10, "{key}: {d}");
    }
}
