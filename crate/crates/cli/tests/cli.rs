//! End-to-end tests of the `helam` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn helam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_accepts_the_key_value_store() {
    let o = helam(&["check", path(&corpus("kvs.hll"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "(() + ())@[client]");
}

#[test]
fn check_rejects_a_guard_not_everyone_knows() {
    let o = helam(&["check", path(&corpus("bad_koc.hll"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("3:12") && err.contains("MaskUndefined"),
        "{err}"
    );
}

#[test]
fn check_can_emit_json_diagnostics() {
    let o = helam(&["check", "--json", path(&corpus("bad_koc.hll"))]);
    assert_eq!(o.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(record["kind"], "MaskUndefined");
    assert_eq!(record["span"]["line"], 3);
    assert_eq!(record["span"]["column"], 12);
    assert!(record["detail"].as_str().unwrap().contains("guard"));
}

#[test]
fn parse_errors_are_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.hll");
    fs::write(&file, "let x = ;").unwrap();
    let o = helam(&["check", path(&file)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("parse error"));
    let o = helam(&["check", "--json", path(&file)]);
    let record: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(record["kind"], "ParseError");
}

#[test]
fn theta_restricts_the_parties_present() {
    let src = corpus("multicast.hll");
    assert_eq!(
        helam(&["check", path(&src), "--theta", "p,q,s"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        helam(&["check", path(&src), "--theta", "p,q"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        helam(&["check", path(&src), "--theta", "P!"]).status.code(),
        Some(2)
    );
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(
        helam(&["check", "/no/such/file.hll"]).status.code(),
        Some(2)
    );
    assert_eq!(helam(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        helam(&["project", path(&corpus("kvs.hll"))]).status.code(),
        Some(2)
    );
}

#[test]
fn delegation_simulation_ends_in_values() {
    let o = helam(&["simulate", path(&corpus("delegation.hll")), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for p in ["alice", "bob", "carroll"] {
        let line = out
            .lines()
            .find(|l| l.starts_with(&format!("{p}: ")))
            .unwrap();
        assert!(["()", "⊥"].contains(&&line[p.len() + 2..]), "{line}");
    }
}

#[test]
fn run_prints_the_value_and_trace() {
    let o = helam(&["run", "--trace", path(&corpus("multicast.hll"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "COM1 com[s][p, q] ()@[s]\n()@[p, q]\n");
}

#[test]
fn project_writes_one_file_per_role() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("locals");
    let o = helam(&[
        "project",
        path(&corpus("multicast.hll")),
        "--all",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let read = |p: &str| fs::read_to_string(out.join(format!("{p}.hlp"))).unwrap();
    assert_eq!(read("p"), "recv_s ⊥\n");
    assert_eq!(read("q"), "recv_s ⊥\n");
    assert_eq!(read("s"), "send_[p, q] ()\n");

    let o = helam(&["project", path(&corpus("multicast.hll")), "--party", "s"]);
    assert_eq!(stdout(&o), "send_[p, q] ()\n");
}

#[test]
fn project_refuses_ill_typed_programs() {
    let o = helam(&["project", path(&corpus("bad_koc.hll")), "--all"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
}

#[test]
fn exhaustive_simulation_finds_one_final_state() {
    let o = helam(&["simulate", "--exhaustive", path(&corpus("kvs.hll"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).contains(", 1 final, 0 deadlocked\n"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn seeded_traces_match_the_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let goldens = corpus("traces");
    let mut seen = 0;
    for entry in fs::read_dir(&goldens).unwrap() {
        let golden = entry.unwrap().path();
        let name = golden.file_stem().unwrap().to_str().unwrap().to_owned();
        let out = dir.path().join(format!("{name}.trace"));
        let src = corpus(&format!("{name}.hll"));
        let o = helam(&["simulate", path(&src), "--seed", "0", "--trace", path(&out)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let expected = fs::read_to_string(&golden).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), expected, "{name}");
        let communication: Vec<&str> = expected.lines().filter(|l| !l.ends_with(": τ")).collect();
        let shown = stdout(&o);
        let printed: Vec<&str> = shown.lines().take(communication.len()).collect();
        assert_eq!(
            printed
                .iter()
                .map(|l| l.split_once(": ").unwrap().1)
                .collect::<Vec<_>>(),
            communication
                .iter()
                .map(|l| l.split_once(": ").unwrap().1)
                .collect::<Vec<_>>(),
            "{name}"
        );
        seen += 1;
    }
    assert_eq!(seen, 8);
}

#[test]
fn fmt_output_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["kvs.hll", "bookseller.hll", "delegation.hll"] {
        let once = stdout(&helam(&["fmt", path(&corpus(name))]));
        let file = dir.path().join(name);
        fs::write(&file, &once).unwrap();
        let twice = helam(&["fmt", path(&file)]);
        assert_eq!(twice.status.code(), Some(0));
        assert_eq!(stdout(&twice), once, "{name}");
        let a = stdout(&helam(&["check", path(&corpus(name))]));
        let b = stdout(&helam(&["check", path(&file)]));
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn metatheory_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = helam(&[
        "test-metatheory",
        "--instances",
        "20",
        "--seed",
        "3",
        "--report",
        path(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let props = r["reports"].as_array().unwrap();
    assert!(props.len() >= 18);
    for p in props {
        assert!(p["failures"].as_array().unwrap().is_empty(), "{p}");
        assert!(p["passed"].as_u64() <= p["checked"].as_u64());
    }
    assert!(stdout(&o).lines().any(|l| l.starts_with("ok agreement: ")));
}
