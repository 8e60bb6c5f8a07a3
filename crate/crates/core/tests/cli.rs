use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holder-lab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn shipped_config_passes() {
    let out = TempDir::new().unwrap();
    let cfg = config("hyperconvex.json");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("hyperconvex.report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["name"], "hyperconvex");
    for c in report["checks"].as_array().unwrap() {
        for key in ["kind", "claimed", "measured", "verdict", "runtime_ms"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
    assert!(out.path().join("hyperconvex.summary.txt").exists());
    assert!(stdout(&o).contains("upper bound"));
}

#[test]
fn parameter_error() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "bad.json",
        r#"{"schema_version": 1, "name": "bad", "map": {"name": "hyperconvex", "params": {"N": 2, "alpha": 0.5}},
            "checks": [{"kind": "invariance"}], "seed": 1}"#,
    );
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("2 <= N^alpha"), "{}", stderr(&o));
}

#[test]
fn config_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("malformed", r#"{"schema_version": 1, "name": "#),
        (
            "unknown_field",
            r#"{"schema_version": 1, "name": "x", "map": {"name": "prus"}, "checks": [{"kind": "orbit"}], "seed": 1, "sead": 2}"#,
        ),
        (
            "unknown_check_field",
            r#"{"schema_version": 1, "name": "x", "map": {"name": "prus"}, "checks": [{"kind": "orbit", "pairz": 3}], "seed": 1}"#,
        ),
        ("no_seed", r#"{"schema_version": 1, "name": "x", "map": {"name": "prus"}, "checks": [{"kind": "orbit"}]}"#),
        ("no_checks", r#"{"schema_version": 1, "name": "x", "map": {"name": "prus"}, "checks": [], "seed": 1}"#),
        (
            "schema",
            r#"{"schema_version": 9, "name": "x", "map": {"name": "prus"}, "checks": [{"kind": "orbit"}], "seed": 1}"#,
        ),
    ];
    for (name, body) in cases {
        let p = write(&dir, &format!("{name}.json"), body);
        let o = run(&["run", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
    }
    let o = run(&["run", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_names() {
    let o = run(&["describe", "nope"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["describe", "hyperconvx"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("did you mean hyperconvex"), "{}", stderr(&o));

    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "u.json",
        r#"{"schema_version": 1, "name": "u", "map": {"name": "norminq"}, "checks": [{"kind": "orbit"}], "seed": 1}"#,
    );
    let o = run(&["run", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("norming"));
}

#[test]
fn list_is_stable() {
    let a = stdout(&run(&["list"]));
    assert_eq!(a, stdout(&run(&["list"])));
    let names: Vec<&str> = a.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(names.len(), 16);
    for name in ["hyperconvex", "norming"] {
        let block: String = a
            .split_inclusive('\n')
            .skip_while(|l| l.trim_end() != name)
            .take_while(|l| l.trim_end() == name || l.starts_with(' '))
            .collect();
        assert!(block.contains("oracle: yes"), "{name}: {block}");
    }
    assert!(a.contains("prus\n"));
}

#[test]
fn describe_sheets() {
    let o = run(&["describe", "c0_family"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("T_a(x) = (1-delta) e1"));
    assert!(s.contains("SigmaBand"));
    let s = stdout(&run(&["describe", "goebel_kirk"]));
    assert!(s.contains("kappa_n = 2 prod_{i=2}^n A_i"));
    assert!(s.contains("A_i = 1 - 1/i^2"));
    let s = stdout(&run(&["describe", "hyperconvex"]));
    assert!(s.contains("2 <= N^alpha"));
    assert!(s.contains("iterate oracle: yes"));
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = config("shift_simplex.json");
    for d in [&a, &b] {
        let o = run(&["run", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "--seed", "99"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let strip = |d: &TempDir| -> String {
        fs::read_to_string(d.path().join("shift_simplex.report.json"))
            .unwrap()
            .lines()
            .filter(|l| !l.contains("\"generated_at\"") && !l.contains("\"runtime_ms\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    assert!(strip(&a).contains("\"seed\": 99"));
}

#[test]
fn strict_mode() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "s.json",
        r#"{"schema_version": 1, "name": "s", "map": {"name": "shift_simplex"},
            "checks": [{"kind": "displacement", "strategy": "cesaro_affine", "budget": 10}], "seed": 1}"#,
    );
    let out = dir.path().to_str().unwrap();
    let o = run(&["run", p.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["run", p.to_str().unwrap(), "--out", out, "--strict"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn failing_check_exits_five() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "f.json",
        r#"{"schema_version": 1, "name": "f", "map": {"name": "prus"},
            "checks": [{"kind": "displacement", "strategy": "sample_min", "budget": 50, "target": 1e-9}], "seed": 1}"#,
    );
    let o = run(&["run", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    let report = fs::read_to_string(dir.path().join("f.report.json")).unwrap();
    assert!(report.contains("\"witness\""));
}
