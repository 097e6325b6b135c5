use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn prc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prc"))
        .args(args)
        .env_remove("PRC_BIT_CEILING")
        .output()
        .expect("spawn prc")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, bytes).unwrap();
    path.to_str().unwrap().to_string()
}

const MILLS: &[&str] = &["chain", "--exps", "const:3", "--seed", "2", "--depth", "4"];

#[test]
fn chain_json_uses_decimal_strings() {
    let out = prc(MILLS);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["primes"], serde_json::json!(["2", "11", "1361", "2521008887"]));
    assert_eq!(v["exps"], "const:3");
    assert_eq!(v["mode"], "min");
    assert_eq!(v["conditional"], false);
    assert_eq!(v["manifest"]["config"]["depth"], "4");
    assert!(v.get("truncated").is_none());

    fn no_numbers(v: &Value) -> bool {
        match v {
            Value::Number(_) => false,
            Value::Array(a) => a.iter().all(no_numbers),
            Value::Object(o) => o.values().all(no_numbers),
            _ => true,
        }
    }
    assert!(no_numbers(&v));
}

#[test]
fn powfact_chain_third_prime() {
    let out = prc(&["chain", "--exps", "powfact:3", "--seed", "2", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let expected = num_bigint::BigUint::from(11u32).pow(81) + 140u32;
    assert_eq!(v["primes"][2], expected.to_string());
    assert_eq!(v["certainty"][2], "probable:32");
}

#[test]
fn composite_seed_and_usage_codes() {
    assert_eq!(prc(&["chain", "--exps", "const:3", "--seed", "4", "--depth", "3"]).status.code(), Some(65));
    assert_eq!(prc(&["chain", "--exps", "const:3", "--seed", "2"]).status.code(), Some(64));
    assert_eq!(prc(&["chain", "--exps", "const:3", "--seed", "2", "--depth", "3", "--mode", "sideways"]).status.code(), Some(64));
    assert_eq!(prc(&["chain", "--exps", "const:3", "--seed", "2", "--depth", "0"]).status.code(), Some(64));
    let help = prc(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("explore"));
}

#[test]
fn truncated_chain_exits_2_with_marker() {
    let out = prc(&["chain", "--exps", "const:3", "--seed", "2", "--depth", "6", "--window-bits", "64"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["primes"].as_array().unwrap().len(), 4);
    assert_eq!(v["truncated"]["reason"], "bit-ceiling");
    assert_eq!(v["truncated"]["reached_depth"], "4");
    assert_eq!(v["truncated"]["requested_depth"], "6");
}

#[test]
fn budget_exhaustion_exits_2() {
    let out = prc(&["chain", "--exps", "const:3", "--seed", "2", "--depth", "3", "--budget", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["truncated"]["reason"], "budget-exhausted");
}

#[test]
fn chain_output_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = prc(&["chain", "--exps", "factorial", "--seed", "2", "--depth", "6", "--gap-policy", "rh-cms"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["conditional"], true);
    let file = write(dir.path(), "chain.json", &out.stdout);
    let report = prc(&["verify", "--chain-file", &file]);
    assert_eq!(report.status.code(), Some(0), "{}", String::from_utf8_lossy(&report.stderr));
    let v = json(&report);
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["manifest"]["conditional"], true);
    for step in v["steps"].as_array().unwrap().iter().skip(1) {
        assert_eq!(step["extremality"]["status"], "verified");
    }
}

#[test]
fn tampered_chain_fails_extremality() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = json(&prc(MILLS));
    v["primes"][1] = Value::String("13".into());
    let file = write(dir.path(), "tampered.json", v.to_string().as_bytes());
    let out = prc(&["verify", "--chain-file", &file]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["steps"][1]["extremality"]["status"], "violated");
    assert_eq!(r["steps"][1]["extremality"]["witness"], "11");
    assert_eq!(r["steps"][2]["in_window"], false);
}

#[test]
fn bad_chain_files_exit_66() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(prc(&["verify", "--chain-file", missing.to_str().unwrap()]).status.code(), Some(66));
    let garbage = write(dir.path(), "garbage.json", b"{\"primes\": 7}");
    assert_eq!(prc(&["verify", "--chain-file", &garbage]).status.code(), Some(66));
    let uneven = write(
        dir.path(),
        "uneven.json",
        br#"{"exps":"const:3","primes":["2","11"],"mode":"min","gap_policy":"empirical","certainty":["deterministic"]}"#,
    );
    assert_eq!(prc(&["verify", "--chain-file", &uneven]).status.code(), Some(66));
}

#[test]
fn explore_csv_rows() {
    let out = prc(&["explore", "--exps", "const:3", "--seeds", "2..3", "--depth", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: "));
    let body = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let under = |root: &str| rows.iter().filter(|r| r[0].split('-').next() == Some(root)).count();
    // root 2: [8, 26) holds 11, 13, 17, 19, 23; root 3: [27, 63) holds nine primes
    assert_eq!(under("2"), 1 + 5);
    assert_eq!(under("3"), 1 + 9);
}

#[test]
fn explore_truncation_exits_2() {
    let out = prc(&["explore", "--exps", "const:3", "--seeds", "2..2", "--depth", "2", "--enumeration-cap", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["gaps"], Value::Null);
}

#[test]
fn approx_scan_separates() {
    let out = prc(&[
        "approx", "--exps", "powfact:3", "--seed", "2", "--depth", "3", "--max-den", "50",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["approximants"].as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r["inside"] == false));
    assert_eq!(rows[9]["numerator"], "13");
}

#[test]
fn digits_precision_refusal_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_prc"))
        .args(["digits", "--exps", "powfact:3", "--seed", "2", "--depth", "3"])
        .env("PRC_BIT_CEILING", "10000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("feasible"));
    assert!(out.stdout.is_empty());
}

#[test]
fn replay_and_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("fixtures");
    let fixture_arg = fixtures.to_str().unwrap();
    let digits = ["digits", "--exps", "powfact:3", "--seed", "2", "--depth", "3", "--format", "text"];
    let first = prc(&digits);
    assert_eq!(first.status.code(), Some(0));
    let artifact = write(dir.path(), "digits.txt", &first.stdout);
    let again = prc(&["replay", &artifact]);
    assert_eq!(again.stdout, first.stdout);

    let mut pinned: Vec<&str> = digits.to_vec();
    pinned.extend(["--fixture-dir", fixture_arg]);
    assert_eq!(prc(&pinned).status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&fixtures).unwrap().count(), 1);
    assert_eq!(prc(&pinned).status.code(), Some(0));
    let entry = std::fs::read_dir(&fixtures).unwrap().next().unwrap().unwrap().path();
    std::fs::write(&entry, "stale\n").unwrap();
    assert_eq!(prc(&pinned).status.code(), Some(1));
}

#[test]
fn sequential_flag_does_not_change_output() {
    let args = ["explore", "--exps", "const:3", "--seeds", "2..7", "--depth", "2"];
    let par = prc(&args);
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let seq = prc(&seq_args);
    assert_eq!(par.stdout, seq.stdout);
}
