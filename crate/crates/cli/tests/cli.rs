// SPDX-License-Identifier: Apache-2.0

//! End-to-end checks of the `ks2d` binary: exit codes, output files, and
//! config embedding.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ks2d"))
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

#[test]
fn constants_default_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["constants"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("constants.json");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["ledger"]["eps_star"].as_f64().unwrap() > 0.0);
    assert!(v["config"]["rho"].as_f64().is_some(), "resolved config embedded");
}

#[test]
fn check_default_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["check"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("check.json").exists());
}

#[test]
fn uncertified_domain_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wide.toml");
    let l = 5.0 * std::f64::consts::PI;
    std::fs::write(&cfg, format!("[domain]\nl1 = {l}\nl2 = {l}\nn = 8\n")).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "check"], dir.path());
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("structured error on stderr");
    assert!(err["error"].as_str().is_some());
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "rho = 0.1\nmisspelled_key = 3\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "constants"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn toy_run_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--T", "5", "toy"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("toy.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t,a,b,G,Gdot,bound_a2b2,bound_b");
    assert!(csv.lines().count() > 2);
    assert!(dir.path().join("toy.config.json").exists());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("toy.json")).unwrap())
            .unwrap();
    assert_eq!(v["config"]["toy"]["t_horizon"].as_f64().unwrap(), 5.0);
}

#[test]
fn iterate_zero_preset_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.toml");
    std::fs::write(&cfg, "[domain]\nn = 16\n\n[init]\npreset = \"zero\"\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "iterate"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for f in ["iterate_series.csv", "w_final.csv", "iterate.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("iterate_series.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("t,a10,a20,a01,a02"));
}

#[test]
fn oversized_initial_remainder_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    // explicit w far above the admissible scale M3 eps^{3/2} / 6
    std::fs::write(
        &cfg,
        "[domain]\nn = 16\n\n[init]\npreset = \"explicit\"\nw_modes = [[1, 1, 1.0]]\n",
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "iterate"], dir.path());
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eps_scale_override_is_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--eps-scale", "0.125", "constants"], dir.path());
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("constants.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(v["config"]["eps_scale"].as_f64().unwrap(), 0.125);
}

#[test]
fn xval_small_grid_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "t_horizon = 0.25\n\n[domain]\nn = 12\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "xval"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("xval.json")).unwrap())
            .unwrap();
    assert!(v["report"]["max_dist_b0"].as_f64().unwrap() < 1e-6);
}
