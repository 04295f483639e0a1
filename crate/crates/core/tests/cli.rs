//! End-to-end runs of the command-line driver: outputs, determinism and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_esg-rh"));
    for var in ["ESG_RH_CONFIG", "ESG_RH_OUT", "ESG_RH_THREADS", "ESG_RH_BACKEND"] {
        cmd.env_remove(var);
    }
    cmd
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = fs::read_to_string(example("small-d.cfg")).unwrap();
    for (from, to) in edits {
        assert!(text.contains(from), "{from}");
        text = text.replacen(from, to, 1);
    }
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

/// Data rows without the metadata comment, which carries a timestamp.
fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = body(path);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn small_d_run_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = example("small-d.cfg");
    let first = run(bin().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(&a));
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let second = run(
        bin()
            .args(["solve", "--threads", "1"])
            .env("ESG_RH_CONFIG", &cfg)
            .env("ESG_RH_OUT", &b),
    );
    assert_eq!(code(&second), 0);
    for name in ["field.csv", "functions.csv"] {
        assert_eq!(body(&a.join(name)), body(&b.join(name)), "{name}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("verification.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true), "{report}");
    assert!(a.join("field.json").exists() && a.join("diagnostics.json").exists());
    let stderr = String::from_utf8_lossy(&first.stderr);
    assert!(stderr.contains("PASS global_relation_2") && !stderr.contains("FAIL"), "{stderr}");

    let verify = run(
        bin()
            .args(["verify", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("v"))
            .arg("--field")
            .arg(a.join("field.csv")),
    );
    assert_eq!(code(&verify), 0, "{}", String::from_utf8_lossy(&verify.stderr));
}

#[test]
fn zero_data_gives_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &[("d = 0.01", "d = 0.0")]);
    let out = run(bin().args(["solve", "--backend", "direct", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let q = column(&dir.path().join("field.csv"), "q");
    assert_eq!(q.len(), 90);
    assert!(q.iter().all(|v| v.abs() <= 1e-12));
}

#[test]
fn oracle_command_writes_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().args(["oracle", "--config"]).arg(example("small-d.cfg")).arg("--out").arg(dir.path()));
    assert_eq!(code(&out), 0);
    let q = column(&dir.path().join("oracle.csv"), "q");
    assert_eq!(q.len(), 90);
    assert!(q.iter().all(|v| *v > 0.0 && *v < 0.01));
    assert!(dir.path().join("oracle.json").exists());
}

#[test]
fn spectral_command_writes_requested_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        bin()
            .args(["spectral", "--data"])
            .arg(example("boundary-decay.csv"))
            .args(["--lambda", "0,1", "--lambda", "-2,0", "--out"])
            .arg(dir.path()),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("spectral.csv");
    let b_re = column(&path, "b_re");
    // q_y = 0.01 e^{-x} on side 1; at l = i the weak-data value is -0.01/8.
    assert!((b_re[0] + 0.01 / 8.0).abs() < 1e-6, "{}", b_re[0]);
    assert_eq!(b_re.len(), 2);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for edits in [
        vec![("d = 0.01", "d = 3.14159")],
        vec![("n_terms = 2001", "n_terms = 2001\nn_term = 5")],
        vec![("backend = \"neumann\"", "backend = \"qr\"")],
        vec![("d = 0.01", "d = \"small\"")],
    ] {
        let cfg = write_config(dir.path(), &edits);
        let out = run(bin().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
        assert_eq!(code(&out), 2, "{edits:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run(bin().args(["solve", "--config"]).arg(dir.path().join("missing.cfg")));
    assert_eq!(code(&out), 2);
    let out = run(bin().args(["solve", "--threads", "0", "--out"]).arg(dir.path()));
    assert_eq!(code(&out), 2);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "side,node,value\n1,0,0\n").unwrap();
    let out = run(bin().args(["spectral", "--data"]).arg(&bad).arg("--out").arg(dir.path()));
    assert_eq!(code(&out), 2);
}

#[test]
fn region_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        bin()
            .args(["spectral", "--data"])
            .arg(example("boundary-decay.csv"))
            .args(["--lambda", "0.5,-0.5", "--out"])
            .arg(dir.path()),
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solver_failure_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &[
            ("d = 0.01", "d = 2.5"),
            ("nx = 10", "nx = 2"),
            ("ny = 9", "ny = 2"),
            ("max_iter = 200", "max_iter = 2"),
        ],
    );
    let out = run(bin().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(code(&out), 4, "{stderr}");
    assert!(stderr.contains("grid points failed"), "{stderr}");
}
