use std::path::Path;
use std::process::{Command, Output};

use sdym_core::cli_report::CheckReport;

fn sdym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdym"))
        .args(args)
        .env("SDYM_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn reports(out: &Output) -> Vec<CheckReport> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is a report"))
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn full_suite_passes_and_is_deterministic() {
    let a = sdym(&["--suite", "all", "--seed", "5"]);
    let b = sdym(&["--suite", "all", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let r = reports(&a);
    assert!(r.len() > 50);
    assert!(r.windows(2).all(|w| w[0].check_id < w[1].check_id));
    assert!(r.iter().all(|x| x.wall_time.is_none() && x.error.is_none()));
    let c = sdym(&["--suite", "all", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn empty_fixture_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "empty.json", "[]");
    let out = sdym(&["--suite", "sdym", "--fixtures", &f]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn corrupted_fixture_fails() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "fixtures.json",
        r#"[{"family": "bpst", "center": [0, 0, 0, 0]},
            {"family": "bpst", "center": [0, 0, 0, 0], "sign_flip": [2]}]"#,
    );
    let out = sdym(&["--suite", "sdym", "--fixtures", &f]);
    assert_eq!(out.status.code(), Some(1));
    let r = reports(&out);
    assert_eq!(r.len(), 2);
    assert!(r[0].pass);
    assert!(!r[1].pass && r[1].residual > r[1].tolerance);
}

#[test]
fn zero_tolerance_fails_every_nonzero_residual() {
    let out = sdym(&["--suite", "rh", "--tolerance-scale", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let r = reports(&out);
    assert!(!r.is_empty());
    for x in &r {
        assert_eq!(x.tolerance, 0.0);
        assert_eq!(x.pass, x.residual == 0.0, "{}", x.check_id);
    }
    assert!(r.iter().any(|x| !x.pass));
}

#[test]
fn configuration_errors_exit_before_running() {
    let out = sdym(&["--jet-order", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"alpha": 1.5}"#);
    assert_eq!(sdym(&["--config", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(sdym(&["--fixtures", &missing.to_string_lossy()]).status.code(), Some(2));
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"seed": 3, "samples": 128, "timings": true}"#);
    let dest = dir.path().join("report.jsonl");
    let out = sdym(&["--config", &cfg, "--suite", "rh", "--out", &dest.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&dest).unwrap();
    let r: Vec<CheckReport> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(r.len(), 5);
    assert!(r.iter().all(|x| x.pass && x.wall_time.is_some()));
}
