use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const GAP0: &str = r#"{"dimension": 1, "box": {"low": -3, "high": 3, "step": 0.01},
 "functions": {"a": "x^2", "b": "(x-2)^2"},
 "saddle": {"labels": ["y1", "y2"], "functions": ["a", "b"]}}"#;

const GAP4: &str = r#"{"dimension": 1, "box": {"low": -2, "high": 2, "step": 0.01},
 "functions": {"a": "-(x+1)^2", "b": "-(x-1)^2"},
 "saddle": {"labels": ["y1", "y2"], "functions": ["a", "b"]}}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("phimax").chain(args.iter().copied());
    let code = phimax_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    (code, v)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) => s.parse().unwrap(),
        other => panic!("not a number: {other}"),
    }
}

/// `a,l1,...,ln,c` flag text for a minorant object of a report.
fn flag(phi: &Value) -> String {
    let mut parts = vec![num(&phi["a"])];
    parts.extend(phi["l"].as_array().unwrap().iter().map(num));
    parts.push(num(&phi["c"]));
    parts.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn coords(v: &Value) -> String {
    v.as_array().unwrap().iter().map(|x| format!("{}", num(x))).collect::<Vec<_>>().join(",")
}

#[test]
fn empty_sublevel_pair_holds() {
    let (code, v) = json(&["intersect", "--phi1", "0,0,0", "--phi2", "1,0,0", "--alpha", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "Holds");
    assert_eq!(v["witness"], Value::Null);
}

#[test]
fn overlapping_pair_fails_with_witness() {
    let (code, v) = json(&["intersect", "--phi1", "0,1,0", "--phi2", "0,-1,0", "--alpha", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "Fails");
    let w = num(&v["witness"][0]);
    assert!(w.abs() < 1.0);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dimension": 1}"#);
    let missing = dir.path().join("missing.json");
    for args in [
        vec!["intersect", "--phi1", "0,0", "--phi2", "1,0,0", "--alpha", "0"],
        vec!["intersect", "--phi1", "0,0,0", "--phi2", "1,0,0", "--alpha", "zero"],
        vec!["envelope", bad.to_str().unwrap(), "--fn", "f"],
        vec!["envelope", missing.to_str().unwrap(), "--fn", "f"],
        vec!["nonsense"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_phimax");
    let ok = Command::new(bin)
        .args(["intersect", "--phi1", "0,0,0", "--phi2", "1,0,0", "--alpha", "0"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["intersect", "--alpha", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn gap_four_sweep_finds_no_witness() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "gap4.json", GAP4);
    let (code, v) = json(&["minimax", file.to_str().unwrap(), "--alpha-sweep", "-4:-2:0.5", "--mode", "support"]);
    assert_eq!(code, 0);
    assert!((num(&v["values"]["gap"]) - 4.0).abs() <= 0.05);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert_eq!(r["witness_found"], false);
        assert_eq!(r["nonexistence"], "certified");
    }
}

#[test]
fn sweep_witnesses_round_trip_through_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "gap0.json", GAP0);
    let path = file.to_str().unwrap();
    for (mode, ball) in [("support", None), ("subgrad", None), ("subgrad", Some("5")), ("conv", None)] {
        let mut args = vec!["minimax", path, "--alpha-sweep", "0:0.5:0.25", "--mode", mode];
        if let Some(g) = ball {
            args.extend(["--ball", g]);
        }
        let (code, v) = json(&args);
        assert_eq!(code, 0, "{mode}");
        for r in v["rows"].as_array().unwrap() {
            assert_eq!(r["witness_found"], true, "{mode} {r}");
            assert_eq!(r["verify_ok"], true);
            let w = &r["witness"];
            let level = format!("{}", num(&w["level"]));
            let (p1, p2) = (flag(&w["phi1"]), flag(&w["phi2"]));
            let mut ip = vec!["intersect", "--phi1", &p1, "--phi2", &p2, "--alpha", &level];
            if let Some(g) = ball {
                ip.extend(["--ball", g]);
            }
            let (code, d) = json(&ip);
            assert_eq!(code, 0);
            assert_eq!(d["verdict"], "Holds", "{mode} {ip:?}");
            // Exact subgradients re-verify at their touching points.
            if mode != "support" {
                for (x, phi, name) in [(&w["x1"], &p1, "a"), (&w["x2"], &p2, "b")] {
                    if x.is_null() {
                        continue;
                    }
                    let t = w[if name == "a" { "y1" } else { "y2" }].as_array().unwrap();
                    if num(&t[0]) != 1.0 && num(&t[1]) != 1.0 {
                        continue;
                    }
                    let label = if num(&t[0]) == 1.0 { "a" } else { "b" };
                    let at = coords(x);
                    let (code, s) = json(&["subdiff", path, "--fn", label, "--at", &at, "--phi", phi]);
                    assert_eq!(code, 0);
                    assert_eq!(s["member"], true, "{mode} {label} {at} {phi}");
                }
            }
        }
    }
}

#[test]
fn csv_rows_follow_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "gap0.json", GAP0);
    let (code, out, _) = run(&["minimax", file.to_str().unwrap(), "--alpha-sweep", "0:1:0.5", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[1], "alpha,mode,region,verdict,witness_found,y1,y2,phi1,phi2,verify_ok");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].contains("skipped"), "{}", lines[4]);
}

#[test]
fn out_flag_writes_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let args = ["intersect", "--phi1", "0,1,0", "--phi2", "0,-1,0", "--alpha", "1"];
    let (_, stdout, _) = run(&args);
    let mut with_out = vec!["--out", target.to_str().unwrap()];
    with_out.extend(args);
    let (code, printed, _) = run(&with_out);
    assert_eq!(code, 0);
    assert!(printed.is_empty());
    assert_eq!(std::fs::read_to_string(&target).unwrap(), stdout);
}

#[test]
fn paper_example_reproduces() {
    let (code, v) = json(&["paper-example", "--gamma", "5", "--eta", "0.1"]);
    assert_eq!(code, 0);
    assert_eq!(v["fullspace_witness"], Value::Null);
    assert_eq!(v["fullspace"]["certified_nonexistence"], true);
    assert_eq!(v["ball"][0]["verdict"], "Holds");
    assert_eq!(v["ball"][0]["verified"], true);
    assert_eq!(v["reproduced"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "gap0.json", GAP0);
    let path = file.to_str().unwrap();
    let args = ["minimax", path, "--alpha-sweep", "-1:0.75:0.25", "--mode", "subgrad", "--ball", "10"];
    let first = run(&args);
    for _ in 0..3 {
        assert_eq!(run(&args), first);
    }
}
