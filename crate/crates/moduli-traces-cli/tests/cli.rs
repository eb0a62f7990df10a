//! End-to-end tests of the binary: output formats, exit codes, report
//! round-trips, and thread-count independence.

use std::process::{Command, Output};

use moduli_traces::verification::SuiteReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_moduli-traces"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn trace_both_routes_agree_on_the_classical_value() {
    let out = run(&[
        "trace", "--d", "-3", "--D", "1", "--N", "1", "--n", "1", "--method", "both", "--amax",
        "20000",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("cm:     -2.400000000000000e2"), "{text}");
    assert!(text.contains("series: -2.400"), "{text}");
    assert!(text.contains("discrepancy:"), "{text}");
}

#[test]
fn trace_json_carries_provenance() {
    let out = run(&[
        "trace", "--d", "-4", "--D", "1", "--N", "1", "--n", "1", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cm"]["method"], "cm");
    assert_eq!(v["cm"]["prec"], 256);
    assert!(v["cm"]["truncation"].as_str().unwrap().contains("classes"));
    assert!((v["cm"]["value"].as_f64().unwrap() - 504.0).abs() < 1e-9);
    assert!(v["cm"]["value_full"].as_str().unwrap().starts_with("504.0000000"));
}

#[test]
fn class_number_is_exact_text() {
    let out = run(&["class-number", "--d", "-4", "--D", "5", "--N", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "H(-4,5,1) = 0");

    let out = run(&["class-number", "--d", "-3", "--D", "1", "--N", "1"]);
    assert_eq!(stdout(&out).trim(), "H(-3,1,1) = 1/3");
}

#[test]
fn inadmissible_parameters_exit_2_and_cite_the_condition() {
    let out = run(&["trace", "--d", "-3", "--D", "1", "--N", "2", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("square modulo 4N"), "{}", stderr(&out));
}

#[test]
fn uncovered_inner_product_case_exits_1() {
    // δ/d = 4 is a square: no closed-form case applies
    let out = run(&["inner-product", "--d", "-3", "--delta", "-12"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("case not covered"), "{}", stderr(&out));
}

#[test]
fn golden_inner_product_value() {
    let out = run(&["inner-product", "--d", "-3", "--delta", "-4", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // log(1728)/(12π) = 0.197742588…
    assert!((v["product"]["value"].as_f64().unwrap() - 0.19774258821784033).abs() < 1e-12);
    assert_eq!(v["case"], "i");
}

#[test]
fn niebur_dump_shows_the_j_function_coefficients() {
    let out = run(&["niebur", "--N", "1", "--n", "1", "--terms", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("q^-1: 1"), "{text}");
    assert!(text.contains("q^0: 24"), "{text}");
    assert!(text.contains("q^1: 196884"), "{text}");
    assert!(text.contains("q^2: 21493760"), "{text}");
}

#[test]
fn exp_sum_routes_agree_in_json() {
    let direct = run(&["exp-sum", "--d", "-7", "--D", "1", "--a", "3", "--n", "2", "--format", "json"]);
    let kstar = run(&[
        "exp-sum", "--d", "-7", "--D", "1", "--a", "3", "--n", "2", "--via-kstar", "--format",
        "json",
    ]);
    assert!(direct.status.success() && kstar.status.success());
    let dv: serde_json::Value = serde_json::from_str(&stdout(&direct)).unwrap();
    let kv: serde_json::Value = serde_json::from_str(&stdout(&kstar)).unwrap();
    assert_eq!(dv["route"], "direct");
    assert_eq!(kv["route"], "kstar");
    let delta = (dv["sum"]["value"].as_f64().unwrap() - kv["sum"]["value"].as_f64().unwrap()).abs();
    assert!(delta < 1e-12, "routes disagree by {delta:e}");
}

#[test]
fn verify_report_round_trips_through_the_library_reader() {
    let out = run(&["verify", "--suite", "golden", "--format", "json", "--prec", "192"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = SuiteReport::from_json(&stdout(&out)).expect("library reader parses CLI output");
    assert_eq!(report.suite, "golden");
    assert_eq!(report.summary.failures, 0);
    assert!(report.all_passed());
}

#[test]
fn verify_is_byte_identical_across_runs_and_thread_counts() {
    let mut with_threads = |k: &str| {
        let out = bin()
            .args(["verify", "--suite", "golden", "--format", "json", "--deterministic", "--prec", "192"])
            .env("MODULI_TRACES_THREADS", k)
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{}", stderr(&out));
        out.stdout
    };
    let one = with_threads("1");
    let four = with_threads("4");
    assert_eq!(one, four, "output depends on thread count");
}

#[test]
fn grid_override_file_shrinks_the_suite() {
    let dir = std::env::temp_dir().join("moduli_traces_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let grid = dir.join("grid.json");
    std::fs::write(&grid, r#"{"kstar_a_max": 8}"#).unwrap();
    let out = run(&[
        "verify", "--suite", "kstar_pin", "--grid", grid.to_str().unwrap(), "--prec", "160",
        "--format", "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = SuiteReport::from_json(&stdout(&out)).unwrap();
    assert_eq!(report.grid["a_max"], 8);
    assert_eq!(report.summary.failures, 0);

    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"frobnicate": 1}"#).unwrap();
    let out = run(&["verify", "--suite", "kstar_pin", "--grid", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown grid override"));
}

#[test]
fn out_flag_writes_the_payload_to_a_file() {
    let dir = std::env::temp_dir().join("moduli_traces_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("class.json");
    let out = run(&[
        "class-number", "--d", "-12", "--D", "1", "--N", "1", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["H"], "4/3");
}

#[test]
fn csv_has_a_sorted_header() {
    let out = run(&["class-number", "--d", "-3", "--D", "1", "--N", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert_eq!(header, "D,H,H_float,N,d");
    assert!(text.lines().nth(1).unwrap().contains("1/3"));
}

#[test]
fn bad_thread_env_exits_2() {
    let out = bin()
        .args(["class-number", "--d", "-3", "--D", "1", "--N", "1"])
        .env("MODULI_TRACES_THREADS", "zero")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("MODULI_TRACES_THREADS"));
}
