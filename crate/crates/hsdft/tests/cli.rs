use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hsdft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsdft")).args(args).output().unwrap()
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn read_dir_sorted(d: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(d)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn eos_table_reaches_the_kink() {
    let d = tempdir();
    let out = hsdft(&["eos-table", "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(d.path().join("eos_table.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# hsdft eos-table config={"));
    assert_eq!(lines.next().unwrap(), "eta,p,gamma,branch");
    let last_fluid = text.lines().rfind(|l| l.ends_with(",fluid")).unwrap();
    let gamma: f64 = last_fluid.split(',').nth(2).unwrap().parse().unwrap();
    assert!((gamma - 15.208).abs() < 1e-3);
}

#[test]
fn solve_is_deterministic() {
    // Same output path both times: the path is part of the echoed header.
    let d = tempdir();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let _ = fs::remove_dir_all(d.path());
        let out = hsdft(&["solve", "--radius", "5", "--nodes", "64", "--gamma", "-4", "--seed", "7", "--jobs", "2", "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        runs.push(read_dir_sorted(d.path()));
    }
    let (fa, fb) = (&runs[0], &runs[1]);
    assert!(fa.len() >= 3);
    assert_eq!(fa, fb);
    for (_, bytes) in fa {
        let text = String::from_utf8_lossy(bytes);
        assert!(text.starts_with("# hsdft solve config={"));
        assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 1);
    }
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(hsdft(&["solve", "--radius", "-1"]).status.code(), Some(2));
    assert_eq!(hsdft(&["solve", "--nodes", "12"]).status.code(), Some(2));
    assert_eq!(hsdft(&["check", "--config", "/nonexistent/hsdft.toml"]).status.code(), Some(2));
    let d = tempdir();
    let p = d.path().join("bad.toml");
    fs::write(&p, "unknown_key = 3\n").unwrap();
    assert_eq!(hsdft(&["check", "--config", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_one() {
    let d = tempdir();
    let p = d.path().join("cfg.toml");
    fs::write(&p, "[solver]\nmax_iter = 1\n[domain]\nradius = 5.0\nnodes = 64\n").unwrap();
    let out = hsdft(&["solve", "--config", p.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_is_echoed_in_header() {
    let d = tempdir();
    let p = d.path().join("cfg.toml");
    fs::write(&p, "seed = 42\n[domain]\nradius = 1.0\nnodes = 64\n[kernel]\na_y = 0.0\na_n = 1.0\n").unwrap();
    let out = hsdft(&["spectral", "--config", p.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(d.path().join("spectral.csv")).unwrap();
    let header = text.lines().next().unwrap();
    let json: serde_json::Value = serde_json::from_str(header.split_once("config=").unwrap().1).unwrap();
    assert_eq!(json["seed"], 42);
    assert_eq!(json["domain"]["radius"], 1.0);
}

#[test]
fn units_table() {
    let out = hsdft(&["--units"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out.stdout.is_empty());
}
