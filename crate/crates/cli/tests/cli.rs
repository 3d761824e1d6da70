use std::path::{Path, PathBuf};
use std::process::Command;

fn walklab(out: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_walklab")).args(args).arg("--out").arg(out).output().unwrap()
}

fn run_dir(out: &Path, args: &[&str]) -> PathBuf {
    let o = walklab(out, args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    PathBuf::from(String::from_utf8(o.stdout).unwrap().trim())
}

#[test]
fn orbit_of_quarter_point_has_two_elements() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_dir(tmp.path(), &["orbit"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("orbit.json")).unwrap()).unwrap();
    assert_eq!(v["size"], 2);
    assert_eq!(v["stationarity_residual"], "0");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 1);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["resolved_params"]["m"], 2);
}

#[test]
fn llt1d_relative_error_is_small() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_dir(tmp.path(), &["llt1d"]);
    let text = std::fs::read_to_string(dir.join("llt1d.csv")).unwrap();
    let last = text.lines().last().unwrap();
    let rel_err: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!(last.starts_with("10000,"));
    assert!(rel_err <= 0.01, "{rel_err}");
}

#[test]
fn missing_config_exits_with_config_code_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let o = walklab(&out, &["simulate", "--config", "/nonexistent/walk.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn unknown_parameter_is_rejected_and_staging_removed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = walklab(tmp.path(), &["llt1d", "--set", "n_lst=[10]"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn invalid_window_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = walklab(tmp.path(), &["angles", "--set", "i=[-0.1,0.1]", "--replicas", "10"]);
    assert!(!o.status.success());
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn same_seed_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--seed", "9", "--set", "steps=500"];
    let da = run_dir(a.path(), &args);
    let db = run_dir(b.path(), &args);
    assert_eq!(da.file_name(), db.file_name());
    let fa = std::fs::read(da.join("trajectory.csv")).unwrap();
    assert_eq!(fa, std::fs::read(db.join("trajectory.csv")).unwrap());
    let dc = run_dir(a.path(), &["simulate", "--seed", "10", "--set", "steps=500"]);
    assert_ne!(fa, std::fs::read(dc.join("trajectory.csv")).unwrap());
}

#[test]
fn config_file_and_overrides_are_applied() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("walk.toml");
    std::fs::write(&cfg, "model = \"ref-sl2\"\n\n[params]\nsteps = 7\n").unwrap();
    let out = tmp.path().join("runs");
    let dir = run_dir(&out, &["simulate", "--config", cfg.to_str().unwrap()]);
    let text = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
    let dir = run_dir(&out, &["simulate", "--config", cfg.to_str().unwrap(), "--set", "steps=3"]);
    assert_eq!(std::fs::read_to_string(dir.join("trajectory.csv")).unwrap().lines().count(), 1 + 4);
}

#[test]
fn unknown_subcommand_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = walklab(tmp.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
