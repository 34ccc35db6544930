// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn quditfft(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_quditfft"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_qft_small_register() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qft.json");
    let code = quditfft(&[
        "--mode",
        "verify-qft",
        "--d",
        "2",
        "--q",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["config"]["d"], 2);
    assert_eq!(r["config"]["q"], 3);
    assert_eq!(r["config"]["mode"], "verify-qft");
    assert!(r["suites"]["verify_qft"]["max_mod_err"].as_f64().unwrap() < 1e-10);
}

#[test]
fn zero_dimension_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(
        quditfft(&[
            "--mode",
            "verify-qft",
            "--d",
            "0",
            "--out",
            out.to_str().unwrap()
        ]),
        2
    );
    assert!(!out.exists());
    assert_eq!(quditfft(&["--mode", "bogus"]), 2);
    assert_eq!(quditfft(&["--spectrum-truncation", "quartic"]), 2);
}

#[test]
fn iontrap_ideal_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trap.json");
    assert_eq!(
        quditfft(&[
            "--mode",
            "iontrap",
            "--d",
            "2",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let r = report(&out);
    let f = &r["suites"]["iontrap"];
    assert!(f["fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
    assert_eq!(f["per_branch_phase_error"].as_array().unwrap().len(), 4);
    assert_eq!(f["spectrum_truncation"], "kepler-only");
    for key in ["d", "l", "m", "timing_params"] {
        assert!(!f[key].is_null(), "{key}");
    }
}

#[test]
fn failed_check_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trap.json");
    let args = [
        "--mode",
        "iontrap",
        "--d",
        "3",
        "--spectrum-truncation",
        "through-revival",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(quditfft(&args), 1);
    let r = report(&out);
    assert_eq!(r["pass"], false);
    assert!(r["suites"]["iontrap"]["fidelity"].as_f64().unwrap() < 1.0 - 1e-9);
}

#[test]
fn config_file_with_overrides_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("pulse.json");
    let csv = dir.path().join("sweep.csv");
    std::fs::write(
        &cfg,
        r#"{"mode": "pulse", "d": 3, "seed": 5, "pulse": {"sweep_points": 5}}"#,
    )
    .unwrap();
    let code = quditfft(&[
        "--config",
        cfg.to_str().unwrap(),
        "--d",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = report(&out);
    assert_eq!(r["config"]["d"], 4);
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(
        r["suites"]["pulse"]["selectivity"]
            .as_array()
            .unwrap()
            .len(),
        5
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("duration,leakage"));
    assert_eq!(text.lines().count(), 6);

    std::fs::write(&cfg, r#"{"mode": "pulse", "typo": 1}"#).unwrap();
    assert_eq!(
        quditfft(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn single_pulse_duration_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let code = quditfft(&[
        "--mode",
        "pulse",
        "--d",
        "3",
        "--pulse-duration",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let sel = &report(&out)["suites"]["pulse"]["selectivity"];
    assert_eq!(sel.as_array().unwrap().len(), 1);
    assert_eq!(sel[0][0], 100.0);
}

#[test]
fn amplitude_cap_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = Command::new(env!("CARGO_BIN_EXE_quditfft"))
        .args(["--d", "2", "--q", "6", "--out", out.to_str().unwrap()])
        .env("QUDITFFT_MAX_AMPS", "32")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("cap"));
}
