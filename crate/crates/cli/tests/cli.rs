use std::process::{Command, Output};

use serde_json::Value;

fn regdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regdet")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

#[test]
fn anomaly_on_unit_sphere_passes() {
    let out = regdet(&["verify-anomaly", "--surface", "sphere:R=1", "--m0", "1", "--m1", "1", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "verify-anomaly");
    assert!(v["results"][0]["rel_residual"].as_f64().unwrap() < 1e-6);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(keys, ["command", "inputs", "results", "pass", "runtime_ms", "timestamp", "version"]);
}

#[test]
fn det2_without_shift_is_one() {
    let out = regdet(&["det2", "--surface", "torus:L1=1,L2=1", "--m0", "1", "--m1", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"][0]["value"].as_f64(), Some(1.0));
}

#[test]
fn numbers_carry_seventeen_digits() {
    let out = regdet(&["det2", "--m0", "1", "--m1", "1", "--lambda-max", "100"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"truncated_log\"")).unwrap();
    let number = line.split(": ").nth(1).unwrap().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{line}");
}

#[test]
fn usage_errors_exit_one_and_name_the_flag() {
    let out = regdet(&["verify-anomaly", "--surface", "sphere:R=0", "--m0", "1", "--m1", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('R'));
    assert!(out.stdout.is_empty());

    let out = regdet(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    let out = regdet(&["det2", "--m0", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m0"));

    let out = regdet(&["det-zeta", "--tol", "1e-2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--tol"));

    let out = regdet(&["cf", "--surface", "cylinder:R=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--surface"));
}

#[test]
fn primed_determinant_of_the_sphere() {
    let out = regdet(&["det-zeta", "--surface", "sphere:R=1", "--m0", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"][0];
    assert!((r["det_zeta"].as_f64().unwrap() - 3.195_311_486).abs() < 1e-6);
    assert_eq!(r["excluded_zero_modes"].as_u64(), Some(1));
}

#[test]
fn heat_trace_reports_coefficients_and_points() {
    let out = regdet(&["heat-trace", "--surface", "sphere:R=1", "--m0", "0", "--t", "1", "--t", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert!((results[0]["a_0"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((results[1]["value"].as_f64().unwrap() - 1.418_442_6).abs() < 1e-6);
    assert_eq!(results[2]["t"].as_f64(), Some(0.5));
}

#[test]
fn csv_and_out_file() {
    let path = std::env::temp_dir().join(format!("regdet-cli-test-{}.csv", std::process::id()));
    let out = regdet(&["cf", "--surface", "torus:L1=1,L2=1", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("command,result,field,value"));
    assert!(text.lines().any(|l| l.starts_with("cf,0,cf_mean,")));
    assert!(text.lines().any(|l| l == "cf,1,source,ImageSum"));
}

#[test]
fn mainlemma_and_massless_on_the_sphere() {
    let out = regdet(&["verify-mainlemma", "--surface", "sphere:R=1", "--m0", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = regdet(&["verify-massless", "--surface", "sphere:R=1", "--sigma", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"][0];
    assert_eq!(r["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn gff_report_independent_of_threads() {
    let strip = |out: Output| -> String {
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("\"timestamp\"") && !l.contains("\"runtime_ms\"") && !l.contains("\"threads\""))
            .collect()
    };
    let args = ["gff-verify", "--samples", "20000", "--seed", "3", "--threads"];
    let one = regdet(&[&args[..], &["1"]].concat());
    assert_eq!(one.status.code(), Some(0));
    let four = regdet(&[&args[..], &["4"]].concat());
    assert_eq!(strip(one), strip(four));
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_regdet"))
        .args(["det2", "--m1", "0"])
        .env("REGDET_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(json(&out)["inputs"]["threads"].as_u64(), Some(3));
}
