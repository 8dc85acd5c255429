use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_dynbarrier");

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SPECTRUM: &str = r#"{"barrier": {"v0": 10.0, "b": 1.0, "v1": 1.0, "omega": 0.25, "e_incident": 5.0}}"#;

#[test]
fn spectrum_emits_nine_verified_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SPECTRUM);
    let o = run(&["spectrum", "--config", &cfg, "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 10);
    assert!(String::from_utf8_lossy(&o.stderr).contains("verified 9 rows"));
}

#[test]
fn width_sweep_is_monotone() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"barrier": {"v0": 2.0, "b": 1.0, "e_incident": 1.0},
            "sweep": {"parameter": "b", "start": 0.1, "stop": 4.0, "count": 20}}"#,
    );
    let o = run(&["static", "--config", &cfg, "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let col = r.headers().unwrap().iter().position(|h| h == "transmission").unwrap();
    let t: Vec<f64> = r.records().map(|x| x.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(t.len(), 20);
    assert!(t.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn tg_compare_contrasts_finite_and_infinite_ladders() {
    let dir = TempDir::new().unwrap();
    // V1 = alpha, so N = 1
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"barrier": {"v0": 4.0, "b": 1.0, "v1": 0.5, "omega": 0.5, "e_incident": 2.0},
            "tg": {"cutoff_tol": 1e-6}}"#,
    );
    let o = run(&["tg-compare", "--config", &cfg, "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let exact = text.lines().filter(|l| l.contains(",exact,")).count();
    let tg = text.lines().filter(|l| l.contains(",tg,")).count();
    assert_eq!(exact, 3);
    assert!(tg >= 5, "{tg}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"barrier": {"v0": 10.0, "b": 1.0, "v1": 2.0, "omega": 0.25, "e_incident": 5.0},
            "sweep": {"parameter": "e_incident", "start": 1.0, "stop": 9.0, "count": 12, "mode": "random"}}"#,
    );
    for cmd in ["transmit", "spectrum", "dos", "traverse", "tg-compare", "static"] {
        for fmt in ["csv", "json", "svg"] {
            if cmd == "traverse" && fmt == "svg" {
                continue;
            }
            let a = run(&[cmd, "--config", &cfg, "--seed", "42", "--format", fmt]);
            let b = run(&[cmd, "--config", &cfg, "--seed", "42", "--format", fmt]);
            assert_eq!(a.status.code(), Some(0), "{cmd} {fmt}: {}", String::from_utf8_lossy(&a.stderr));
            assert_eq!(a.stdout, b.stdout, "{cmd} {fmt}");
        }
    }
    let a = run(&["transmit", "--config", &cfg, "--seed", "42"]);
    let c = run(&["transmit", "--config", &cfg, "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn every_command_verifies() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"barrier": {"v0": 2.0, "b": 1.0, "v1": 1.5, "omega": 0.25, "e_incident": 1.0},
            "oracle": {"points": 2048, "samples": 64}}"#,
    );
    for cmd in ["static", "spectrum", "transmit", "traverse", "dos", "tg-compare", "oracle"] {
        let o = run(&[cmd, "--config", &cfg, "--verify"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SPECTRUM);
    let out = dir.path().join("dos.svg");
    let o = run(&["dos", "--config", &cfg, "--format", "svg", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let svg = fs::read_to_string(out).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn validation_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("{\n  \"barrier\": {\"v0\": 2.0, \"b\": 1.0}\n}", "e_incident"),
        (r#"{"barrier": {"v0": 2.0, "b": 1.0, "e_incident": 3.0}}"#, "e_incident"),
        (r#"{"barrier": {"v0": 2.0, "b": 1.0, "e_incident": 1.0}, "colour": 1}"#, "colour"),
        (
            r#"{"barrier": {"v0": 2.0, "b": 1.0, "e_incident": 1.0}, "sweep": {"parameter": "mass", "start": 0, "stop": 1, "count": 3}}"#,
            "sweep.parameter",
        ),
        (
            r#"{"barrier": {"v0": 2.0, "b": 1.0, "e_incident": 1.0}, "sweep": {"parameter": "b", "start": 0, "stop": 1, "count": 1}}"#,
            "sweep.count",
        ),
        (r#"{"command": "dos", "barrier": {"v0": 2.0, "b": 1.0, "e_incident": 1.0}}"#, "command"),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.json"), body);
        let o = run(&["static", "--config", &cfg]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(1), "case {i}: {err}");
        assert!(err.contains(needle), "case {i}: {err}");
    }
    let o = run(&["static", "--config", "/nonexistent/c.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["teleport", "--config", "x.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    // V1 < alpha gives N = 0: no traversal times exist
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"barrier": {"v0": 2.0, "b": 1.0, "v1": 0.1, "omega": 1.0, "e_incident": 1.0}}"#,
    );
    let o = run(&["traverse", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
