//! The command line binary: outputs and exit codes.

use std::process::Command;

fn uavsar() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uavsar"))
}

fn small_config(dir: &tempfile::TempDir) -> std::path::PathBuf {
    let path = dir.path().join("small.cfg");
    std::fs::write(&path, "# four S-UAVs\nn_suavs = 4\nn_targets = 5\nseeds = 0, 1\n").unwrap();
    path
}

#[test]
fn run_writes_one_row_per_scheme_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let out = dir.path().join("rows.csv");
    let st = uavsar().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(lines[0].starts_with("seed,scheme,swept_param_name"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
}

#[test]
fn scheme_and_seed_filters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let out = uavsar()
        .args(["sweep", "--param", "tx_power_w", "--values", "0.2,1.0", "--seed", "5", "--scheme", "static_suavs", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("5,static_suavs,tx_power_w,")));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "bandwidth_hz = -1\n").unwrap();
    assert_eq!(uavsar().args(["run", "--config"]).arg(&bad).status().unwrap().code(), Some(2));
    let cfg = small_config(&dir);
    let st = uavsar().args(["sweep", "--param", "area_m", "--values", "1", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(2));
    assert_eq!(uavsar().args(["run", "--config", "/nonexistent/x.cfg"]).status().unwrap().code(), Some(2));
    assert_eq!(uavsar().args(["run", "--scheme", "nope"]).status().unwrap().code(), Some(2));
}

#[test]
fn error_rows_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.cfg");
    std::fs::write(&cfg, "n_suavs = 4\nn_targets = 5\nseeds = 0\nsuav_energy_budget_j = 1e-9\nsuav_hover_energy_j = 0\n").unwrap();
    let out = uavsar().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("error: "));
}

#[test]
fn oracle_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let out = uavsar().args(["oracle", "--seed", "3", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let ratio: f64 = row[4].parse().unwrap();
    assert!((1.0 - 1e-9..=1.05).contains(&ratio), "{text}");

    let path = dir.path().join("trace.txt");
    let st = uavsar().args(["trace", "--seed", "3", "--out"]).arg(&path).arg("--config").arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("outer,objective_s\n0,"));
    assert!(text.contains("iteration,lambda_bps,slack_s,x,y,h\n0,"));
}
