use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nls4(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls4")).args(args).current_dir(cwd).env_remove("NLS4_RUN_ROOT").output().unwrap()
}

const CONFIG: &str = "\
[run]
name = small
seed = 3

[grid]
d = 2
n = 32
L = 12

[evolve]
mu = 1
dt = 1e-3
t_end = 0.05
sample_every = 10

[initial]
kind = gaussian
width = 1.0
velocity = 0.5, 0
";

#[test]
fn simulate_then_diagnose_then_morawetz() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), CONFIG).unwrap();
    let out = nls4(&["simulate", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("small");
    let snaps = fs::read_dir(&run).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "nls4")).count();
    assert_eq!(snaps, 6);
    assert!(fs::read_to_string(run.join("manifest.txt")).unwrap().contains("status = ok"));

    let out = nls4(&["diagnose", "small"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(run.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t[time],mass[L2^2]"));
    assert_eq!(csv.lines().count(), 7);

    let out = nls4(&["morawetz", "small", "--R", "0.5", "--J", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(run.join("morawetz.csv").exists());
    assert!(run.join("morawetz.svg").exists());
}

#[test]
fn identical_configs_give_identical_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), CONFIG).unwrap();
    for name in ["a", "b"] {
        assert_eq!(nls4(&["simulate", "run.cfg", "--out", name], dir.path()).status.code(), Some(0));
    }
    for i in 0..6 {
        let f = format!("snap_{i:05}.nls4");
        assert_eq!(fs::read(dir.path().join("a").join(&f)).unwrap(), fs::read(dir.path().join("b").join(&f)).unwrap());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nls4(&["simulate", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(nls4(&["simulate", "missing.cfg"], dir.path()).status.code(), Some(1));
    fs::write(dir.path().join("bad.cfg"), CONFIG.replace("n = 32", "n = 30")).unwrap();
    let out = nls4(&["simulate", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));
    // Gaussian hugging the box edge trips the boundary-mass guard
    fs::write(dir.path().join("edge.cfg"), CONFIG.replace("velocity = 0.5, 0", "center = 9, 0")).unwrap();
    let out = nls4(&["simulate", "edge.cfg", "--out", "edge"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(fs::read_to_string(dir.path().join("edge/manifest.txt")).unwrap().contains("boundary mass"));
}

#[test]
fn weights_and_smooth_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls4(&["weights", "--R", "1", "--J", "3", "--samples", "50", "--out", "w.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let w = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(w.lines().next().unwrap().starts_with("r"));
    assert!(w.lines().count() > 50);

    fs::write(dir.path().join("n.csv"), "t,value # piecewise-linear end=4\n0,4\n1,1\n2,1\n3,8\n").unwrap();
    let out = nls4(&["smooth", "n.csv", "-m", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty());
}

#[test]
fn check_runs_a_fast_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls4(&["check", "--only", "4,6"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
}
