use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use glider_core::REFERENCE_CONFIG_TOML;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn glider(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glider")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = glider(&["run", "--task", path(&data("sawtooth.toml")), "--out", path(dir.path()), "--max-cycles", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trajectory.csv", "events.jsonl", "summary.json", "depth-profile.csv", "xy-track.csv", "state-timeseries.csv"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cycles"], 1);
    assert_eq!(summary["status"], "cycle-limit-reached");
    let header = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "t,x_n,y_e,z_d,qw,qx,qy,qz,roll,pitch,yaw,u,v,w,p,q,r,zeta,rp1,mb,phase"
    );
    let events = fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    for line in events.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["t"].is_number() && v["kind"].is_string());
    }
}

#[test]
fn explicit_config_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("glider.toml");
    fs::write(&cfg, REFERENCE_CONFIG_TOML).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let task = data("sawtooth.toml");
    let common = ["--task", path(&task), "--max-cycles", "1"];
    let oa = glider(&[&["run", "--out", path(&a)][..], &common].concat());
    let ob = glider(&[&["run", "--config", path(&cfg), "--out", path(&b)][..], &common].concat());
    assert!(oa.status.success() && ob.status.success());
    assert_eq!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(b.join("trajectory.csv")).unwrap());
}

#[test]
fn missing_field_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let text: String = REFERENCE_CONFIG_TOML.lines().filter(|l| !l.starts_with("m_s ")).collect::<Vec<_>>().join("\n");
    fs::write(&cfg, text).unwrap();
    let o = glider(&["trim", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing field m_s"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_bad_override_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    fs::write(&cfg, format!("{REFERENCE_CONFIG_TOML}\nm_ss = 3.0\n")).unwrap();
    assert_eq!(glider(&["gains", "--config", path(&cfg)]).status.code(), Some(1));

    let o = glider(&["run", "--task", path(&data("sawtooth.toml")), "--out", path(dir.path()), "--dt", "-0.1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(glider(&["run", "--task", "/nonexistent/task.toml"]).status.code(), Some(1));
}

#[test]
fn untrimmable_request_is_numerical_error() {
    let o = glider(&["trim", "--pitch-descend", "-1.2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn time_budget_exhaustion_is_mission_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = glider(&["run", "--task", path(&data("sawtooth.toml")), "--out", path(dir.path()), "--max-time", "60"]);
    assert_eq!(o.status.code(), Some(3));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "time-budget-exhausted");
}

#[test]
fn check_flags_leg_inside_turning_circle() {
    let dir = tempfile::tempdir().unwrap();
    let o = glider(&["check", "--task", path(&data("unreachable_first_leg.toml")), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("reachability.json")).unwrap()).unwrap();
    assert_eq!(v[0]["leg"], 1);
    assert_eq!(v[0]["reachable"], false);
    assert_eq!(v[1]["reachable"], true);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.lines().any(|l| l.trim_start().starts_with("1 ") && l.contains("UNREACHABLE")));

    let o = glider(&["check", "--task", path(&data("five_waypoints.toml")), "--v-lower", "0.5", "--r-upper", "0.01"]);
    assert!(o.status.success());
}

#[test]
fn gains_prints_four_stabilizing_matrices() {
    let o = glider(&["gains", "--heading", "-0.5", "--depth", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 4);
    for e in entries {
        assert!(e["care_residual"].as_f64().unwrap() <= 1e-8);
        assert!(e["closed_loop_abscissa"].as_f64().unwrap() < 0.0);
    }
    assert_eq!(entries[0]["k"].as_array().unwrap().len(), 2);
    assert_eq!(entries[1]["k"].as_array().unwrap().len(), 1);
}

#[test]
fn trim_prints_both_glides() {
    let o = glider(&["trim", "--pitch-descend", "-0.4", "--pitch-ascend", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["descend"]["pitch"], -0.4);
    assert_eq!(v["ascend"]["pitch"], 0.5);
    assert!(v["descend"]["residual"].as_f64().unwrap() < 1e-8);
}
