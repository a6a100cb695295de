use std::path::Path;
use std::process::{Command, Output};

use vfl::harness::io::{read_diagnostics, read_snapshot, snapshot_path};

fn vfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vfl")).args(args).output().expect("spawn vfl")
}

fn dir_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn unknown_flag_and_bad_values_exit_2() {
    assert_eq!(vfl(&["--bogus"]).status.code(), Some(2));
    assert_eq!(vfl(&["--dt", "-1", "--steps", "1"]).status.code(), Some(2));
    assert_eq!(vfl(&["--experiment", "7"]).status.code(), Some(2));
    assert_eq!(vfl(&["--alpha-mult", "0.5", "--steps", "1"]).status.code(), Some(2));
    assert_eq!(vfl(&["--force", "sideways", "--steps", "1"]).status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let out = vfl(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--experiment"));
}

#[test]
fn malformed_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "dt 0.01\n").unwrap();
    assert_eq!(vfl(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, "colour=blue\n").unwrap();
    assert_eq!(vfl(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(vfl(&["--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
}

#[test]
fn blown_up_run_exits_3_and_keeps_partial_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = vfl(&["--experiment", "1", "--dt", "0.04", "--steps", "2500", "--diag-every", "25", "--out-dir", &dir_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_diagnostics(&dir.path().join("diagnostics.csv")).unwrap();
    assert!(!rows.is_empty() && rows.len() < 101);
}

#[test]
fn diagnostics_rows_include_step_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = vfl(&["--steps", "20", "--diag-every", "5", "--out-dir", &dir_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_diagnostics(&dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(header[0], "step");
    assert_eq!(rows.len(), 5);
    let steps: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(steps, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
    assert_eq!(rows[0][3], 0.0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("step 20 time"));
}

#[test]
fn empty_diagnostics_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("diagnostics.csv");
    std::fs::write(&p, "").unwrap();
    assert!(read_diagnostics(&p).is_err());
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = vfl(&["--experiment", "3", "--n", "8", "--steps", "10", "--diag-every", "2", "--out-dir", &dir_arg(d.path())]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("diagnostics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# short run\nsteps = 4\ndiag_every=1\ndt=0.02\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = vfl(&["--config", cfg.to_str().unwrap(), "--steps", "6", "--snap-every", "6", "--out-dir", &dir_arg(&out_dir)]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_diagnostics(&out_dir.join("diagnostics.csv")).unwrap();
    assert_eq!(rows.len(), 7);
    assert!((rows[6][1] - 0.12).abs() < 1e-12);
    let snap = read_snapshot(&snapshot_path(&out_dir, 6)).unwrap();
    assert_eq!(snap.config().unwrap().dt, 0.02);
}

#[test]
fn restart_reproduces_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let (full, half, rest) = (dir.path().join("full"), dir.path().join("half"), dir.path().join("rest"));
    let common = ["--experiment", "3", "--n", "8", "--diag-every", "2", "--snap-every", "10", "--mesh"];
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = common.to_vec();
        args.extend_from_slice(extra);
        let out = vfl(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["--steps", "20", "--out-dir", &dir_arg(&full)]);
    run(&["--steps", "10", "--out-dir", &dir_arg(&half)]);
    let snap10 = snapshot_path(&half, 10);
    run(&["--restart", snap10.to_str().unwrap(), "--steps", "20", "--out-dir", &dir_arg(&rest)]);

    let body = |d: &Path| {
        let text = std::fs::read_to_string(snapshot_path(d, 20)).unwrap();
        text.lines().filter(|l| !l.starts_with("# out-dir")).map(String::from).collect::<Vec<_>>()
    };
    assert_eq!(body(&full), body(&rest));
    assert!(full.join("mesh_000020.txt").exists());

    let (_, fr) = read_diagnostics(&full.join("diagnostics.csv")).unwrap();
    let (_, rr) = read_diagnostics(&rest.join("diagnostics.csv")).unwrap();
    assert_eq!(rr[0][0], 10.0);
    assert_eq!(&fr[5..], &rr[..]);
}

#[test]
fn restart_from_garbage_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("snap.txt");
    std::fs::write(&p, "# vfl snapshot\n1 2 3\n").unwrap();
    assert_eq!(vfl(&["--restart", p.to_str().unwrap()]).status.code(), Some(2));
}
