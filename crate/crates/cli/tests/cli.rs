use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primpair"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

/// Parses stdout as JSON and validates it against the shipped schema.
fn json(out: &Output, schema: &str) -> Value {
    let v: Value = serde_json::from_str(&stdout(out)).expect("stdout is JSON");
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{schema}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&s).expect("schema compiles");
    if let Err(errors) = compiled.validate(&v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{schema} output violates its schema: {msgs:?}");
    }
    v
}

#[test]
fn criterion_passes_psc() {
    let out = run(&["criterion", "--q", "21013", "--n", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "criterion");
    assert_eq!(v["kind"], "PSC");
    assert_eq!(v["passed"], true);
    assert_eq!(v["threshold"], "15977.7");
}

#[test]
fn criterion_with_fixed_plan() {
    let out = run(&["criterion", "--q", "3947", "--t", "3", "--s", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "criterion");
    assert_eq!(v["kind"], "MPSC");
    assert_eq!(v["r"], 4);
    let out = run(&["criterion", "--q", "3947", "--t", "3", "--s", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out, "criterion")["passed"], false);
}

#[test]
fn criterion_unresolved_exits_one() {
    let out = run(&["criterion", "--q", "20747", "--n", "4"]);
    assert_eq!(code(&out), 1);
    json(&out, "criterion");
}

#[test]
fn verify_failure_exits_one() {
    let out = run(&["verify", "--q", "4", "--n", "3", "--algorithm", "exhaustive"]);
    assert_eq!(code(&out), 1);
    let v = json(&out, "verify");
    assert_eq!(v["outcome"], "Failure");
    assert_eq!(v["failures"], serde_json::json!([0]));
}

#[test]
fn verify_success_and_prime_power_flags() {
    let out = run(&["verify", "--p", "2", "--h", "2", "--n", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "verify");
    assert_eq!(v["q"], 4);
    assert_eq!(v["witnesses"].as_object().unwrap().len(), 4);
}

#[test]
fn quartic_search() {
    let out = run(&["verify", "--q", "31", "--n", "4", "--algorithm", "quartic", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a,kind,witness");
    assert_eq!(lines.len(), 32);
    assert!(lines[1..].iter().all(|l| l.contains(",polynomial,")));
    let out = run(&["verify", "--q", "31", "--n", "3", "--algorithm", "quartic"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_resume_reuses_records() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("run.ck");
    let ck = ck.to_str().unwrap();
    let first = run(&["verify", "--q", "3", "--n", "4", "--resume", ck]);
    assert_eq!(code(&first), 0);
    let recorded = std::fs::read_to_string(ck).unwrap();
    assert!(recorded.lines().last().unwrap().starts_with("RESULT,3,4,Success"));
    let second = run(&["verify", "--q", "3", "--n", "4", "--resume", ck]);
    assert_eq!(stdout(&first), stdout(&second));
    assert_eq!(std::fs::read_to_string(ck).unwrap(), recorded);
}

#[test]
fn factor_one_is_empty() {
    let out = run(&["factor", "--m", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "factor");
    assert_eq!(v["factors"], serde_json::json!([]));
}

#[test]
fn factor_text_and_csv() {
    let out = run(&["factor", "--m", "360", "--format", "text"]);
    assert_eq!(stdout(&out).trim(), "360 = 2^3 * 3^2 * 5");
    let out = run(&["factor", "--m", "360", "--format", "csv"]);
    assert_eq!(stdout(&out), "prime,exponent\n2,3\n3,2\n5,1\n");
    json(&run(&["factor", "--m", "340282366920938463463374607431768211455"]), "factor");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["factor", "--bogus"][..],
        &["factor"],
        &["frobnicate"],
        &["verify", "--q", "6", "--n", "4"],
        &["factor", "--m", "0"],
        &["charsum", "--q", "2", "--n", "4", "--limit-charsum", "0"],
        &["tables", "cascade", "--n", "5"],
        &["survey", "--range-lo", "10", "--range-hi", "5"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn survey_omega_twelve() {
    let out = run(&[
        "survey", "--range-lo", "1650", "--range-hi", "70546", "--omega-filter", "12", "--cascade", "PSC",
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out, "survey");
    let qs: Vec<u64> = v["records"].as_array().unwrap().iter().map(|r| r["q"].as_u64().unwrap()).collect();
    assert_eq!(
        qs,
        [20747, 21013, 25943, 30103, 38917, 52571, 53087, 53129, 53923, 59753, 60397, 65963, 66347, 66457]
    );
    assert_eq!(v["unresolved"], serde_json::json!([20747]));
}

#[test]
fn survey_csv_columns() {
    let out = run(&["survey", "--range-lo", "2", "--range-hi", "9", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "q,n,omega,resolution,t,r,s,delta,threshold,passed");
    assert_eq!(lines.count(), 7);
    assert_eq!(code(&out), 1);
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let args = ["survey", "--range-lo", "2", "--range-hi", "3000"];
    let one = run(&[&args[..], &["--workers", "1"]].concat());
    let four = run(&[&args[..], &["--workers", "4"]].concat());
    let again = run(&[&args[..], &["--workers", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(four.stdout, again.stdout);
    let v = run(&["verify", "--q", "9", "--n", "4", "--workers", "3"]);
    let w = run(&["verify", "--q", "9", "--n", "4", "--workers", "1"]);
    assert_eq!(v.stdout, w.stdout);
}

#[test]
fn charsum_reports() {
    let out = run(&["charsum", "--q", "2", "--n", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out, "charsum")["all_hold"], true);
    // The partner-character bound is exceeded for odd q.
    let out = run(&["charsum", "--q", "3", "--n", "4"]);
    assert_eq!(code(&out), 1);
    let v = json(&out, "charsum");
    let partner = v["classes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["key"] == "partner_only")
        .unwrap();
    assert!(partner["max_ratio"].as_f64().unwrap() > 1.0);
}

#[test]
fn tables() {
    let out = run(&["tables", "table2"]);
    let v = json(&out, "table2");
    assert_eq!(v["rows"].as_array().unwrap().len(), 52);
    // One printed R' is out of reach, so the table is not fully consistent.
    assert_eq!(v["all_ok"], false);
    assert_eq!(code(&out), 1);

    let out = run(&["tables", "table1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out, "table1");
    assert_eq!(v["printed_total"], 358);

    for n in ["3", "4"] {
        let out = run(&["tables", "cascade", "--n", n]);
        assert_eq!(code(&out), 0);
        json(&out, "cascade");
    }

    let out = run(&["tables", "anchor"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out, "anchor")["last_prime"], 199247);
}
