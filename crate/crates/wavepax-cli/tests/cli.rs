//! Exercises the `wavepax` binary: outputs, files and exit codes.

use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wavepax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavepax"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn packet(k: f64, y: f64) -> Value {
    json!({"n": 1, "k_star": [k], "y_star": [y], "envelope": {"family": "gaussian", "width": 0.3, "amplitude": 1.0}})
}

/// Small counterpropagating Kerr run with a two-point sweep.
fn run_config(extra: Value) -> Value {
    let mut v = json!({
        "model": {"preset": "nls1d", "a2": 1.0, "a0": 1.0},
        "nonlinearity": {"preset": "kerr", "q": 1.0},
        "packets": [packet(1.0, -0.05), packet(-1.0, 0.05)],
        "beta": 0.2,
        "rho": 0.02,
        "grid": {"n": 512, "dk": 0.01},
        "solver": {"picard_window": 0.05},
        "sweep": {"rho": [0.02, 0.01]}
    });
    for (k, x) in extra.as_object().unwrap() {
        v[k] = x.clone();
    }
    v
}

#[test]
fn resonance_analyze_prints_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "a.json",
        &json!({"model": {"preset": "nls1d", "a2": 1.0, "a0": 2.0}, "spectrum": [[1, 1.0], [1, 2.0]], "orders": [2]}),
    );
    let o = wavepax(&[
        "resonance",
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--probe",
        "4",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let (report, rest) = text.split_once("\n\n").unwrap();
    let v: Value = serde_json::from_str(report).unwrap();
    assert!(
        v["report"]["classification"]
            .to_string()
            .contains("conditionally_invariant"),
        "{}",
        v["report"]
    );
    assert!(rest.contains("genericity probe: 4/4"), "{rest}");
}

#[test]
fn simulate_writes_snapshots_metrics_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "run.json",
        &run_config(json!({"rho": 0.05, "snapshots": {"every": 5}})),
    );
    let out = dir.path().join("out");
    let o = wavepax(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let snaps = summary["snapshots"].as_array().unwrap();
    assert!(snaps.len() >= 2);
    for s in snaps {
        assert!(out.join(s.as_str().unwrap()).exists());
    }
    assert!(out.join("metrics.csv").exists());
    assert!(out.join("summary.json").exists());
}

#[test]
fn passing_experiment_exits_zero_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/preservation.json");
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = wavepax(&[
            "experiment",
            "preservation",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "3",
            "--workers",
            workers,
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}{}",
            stdout(&o),
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(stdout(&o).contains("preservation: passed"));
        (
            std::fs::read(out.join("result.json")).unwrap(),
            std::fs::read(out.join("metrics.csv")).unwrap(),
        )
    };
    let a = run("a", "2");
    let b = run("b", "1");
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a.0).unwrap();
    assert_eq!(v["provenance"]["seed"], 3);
}

#[test]
fn failed_threshold_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "run.json",
        &run_config(json!({"thresholds": {"max_ratio": 1e-9}})),
    );
    let out = dir.path().join("out");
    let o = wavepax(&[
        "experiment",
        "preservation",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
    assert!(out.join("result.json").exists());
}

#[test]
fn violated_hypothesis_exits_two_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    // second-harmonic pair: the spectrum is not invariant under the
    // resonance map of a quadratic nonlinearity with this dispersion
    let cfg = write_json(
        dir.path(),
        "shg.json",
        &run_config(json!({
            "model": {"preset": "nls1d", "a2": 1.0, "a0": 0.5},
            "nonlinearity": {"preset": "power", "m": 2, "q": 1.0},
            "packets": [packet(0.5, 0.0)],
            "sweep": {"rho": [0.02]}
        })),
    );
    let out = dir.path().join("out");
    let args = [
        "experiment",
        "preservation",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let o = wavepax(&args);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    let mut forced = args.to_vec();
    forced.push("--force");
    let o = wavepax(&forced);
    assert!(
        matches!(o.status.code(), Some(0) | Some(1)),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("result.json").exists());
}

#[test]
fn bad_configuration_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "bad.json",
        &json!({"model": {"preset": "nls1d"}, "unknown": 1}),
    );
    let out = dir.path().join("out");
    let o = wavepax(&[
        "experiment",
        "averaging",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = wavepax(&[
        "simulate",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
        "--out",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
