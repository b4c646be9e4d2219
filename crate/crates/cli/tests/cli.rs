use std::process::{Command, Output};

use serde_json::Value;

fn pcx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcx")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = pcx(&full);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON from {args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr))
    });
    (out.status.code().unwrap(), v)
}

#[test]
fn conjecture2_k4_certificate() {
    let (code, v) = json(&["verify", "conjecture2", "--k", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["claim"], "conjecture2");
    assert_eq!(v["status"], "pass");
    assert_eq!(v["records"].as_array().unwrap().len(), 210);
}

#[test]
fn f_54_3_enumerates_two_maxima() {
    let (code, v) = json(&["f", "--n", "54", "--k", "3", "--enumerate"]);
    assert_eq!(code, 0);
    assert_eq!(v["f_value"], 39);
    assert!(v["maximum_sets"].as_array().unwrap().len() >= 2);
    assert_eq!(v["E_is_unique_maximum"], false);
}

#[test]
fn scan_h_2000() {
    let (code, v) = json(&["scan-h", "--t-max", "2000"]);
    assert_eq!(code, 0);
    let ts: Vec<u64> = v["hits"].as_array().unwrap().iter().map(|r| r["t"].as_u64().unwrap()).collect();
    assert_eq!(ts, vec![209, 1823]);
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["f", "--n", "0", "--k", "3"],
        vec!["f", "--k", "3"],
        vec!["nonsense"],
        vec!["range", "--k", "3", "--from", "9", "--to", "5", "--mode", "value"],
        vec!["verify", "uniqueness-k4", "--from", "48", "--to", "50"],
        vec!["verify", "conjecture2", "--k", "5"],
        vec!["verify", "conjecture2", "--k", "3", "--table", "/definitely/not/here.json"],
        vec!["f", "--n", "54", "--k", "3", "--format", "xml"],
    ] {
        assert_eq!(pcx(&args).status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(pcx(&["--help"]).status.code(), Some(0));
    assert_eq!(pcx(&["--version"]).status.code(), Some(0));
    assert_eq!(pcx(&["verify", "--help"]).status.code(), Some(0));
}

#[test]
fn falsified_claims_exit_1() {
    assert_eq!(pcx(&["verify", "counting", "--k", "3", "--from", "54", "--to", "55"]).status.code(), Some(1));
    assert_eq!(pcx(&["range", "--k", "3", "--from", "54", "--to", "54", "--mode", "uniqueness"]).status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exits_2() {
    let (code, v) = json(&["f", "--n", "90", "--k", "4", "--enumerate", "--budget-nodes", "5"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"]["kind"], "budget-exceeded");
    assert!(v["f_value"].is_null());
}

#[test]
fn broken_table_file_fails_certificate() {
    let mut table = pcx_core::tables::builtin_table(3).unwrap();
    // drop 13 from the last block of the a = 23 entry, leaving it uncovered
    let last = table.entries[1].blocks.last_mut().unwrap();
    last.elements.retain(|&x| x != 13);
    let path = std::env::temp_dir().join(format!("pcx-k3-{}.json", std::process::id()));
    std::fs::write(&path, table.to_json()).unwrap();
    let (code, v) = json(&["verify", "conjecture2", "--k", "3", "--table", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 1);
    assert_eq!(v["status"], "fail");
    let bad: Vec<i64> = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["status"] == "fail")
        .map(|r| r["a"].as_i64().unwrap())
        .collect();
    assert_eq!(bad, vec![23]);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("pcx-out-{}.json", std::process::id()));
    let out = pcx(&["remark", "--k", "3", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["n"], 24);
    assert_eq!(v["status"], "pass");
    std::fs::remove_file(&path).ok();
}

#[test]
fn text_output_is_readable() {
    let out = pcx(&["f", "--n", "10", "--k", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("f(10, 2) = 7"));
}

#[test]
fn flags_after_subcommand_and_threads() {
    let a = pcx(&["verify", "conjecture2", "--k", "3", "--format", "json", "--threads", "1"]);
    let b = pcx(&["--threads", "3", "--format", "json", "verify", "conjecture2", "--k", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(pcx(&["--threads", "0", "remark", "--k", "2"]).status.code(), Some(64));
}
