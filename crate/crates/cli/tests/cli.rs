use std::process::{Command, Output};

use serde_json::Value;

fn qlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args(args)
        .env_remove("Q_LAB_TOL")
        .output()
        .expect("qlab runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn eval_exact_prints_fractions() {
    let out = qlab(&["eval", "qfact", "3", "--q", "1/2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["function"], "qfact");
    assert_eq!(v["q"], "1/2");
    assert_eq!(v["value"], "21/8");

    assert_eq!(json(&qlab(&["eval", "qnum", "0", "--q", "1/2"]))["value"], "0");
    assert_eq!(json(&qlab(&["eval", "gamma1", "4", "--q", "1/2"]))["value"], "21/8");
}

#[test]
fn eval_float_mode() {
    let v = json(&qlab(&["eval", "gamma1", "4", "--q", "1/2", "--mode", "float"]));
    assert_eq!(v["value"].as_f64(), Some(2.625));
    let v = json(&qlab(&["eval", "qbinom", "4", "2", "--q", "0.5", "--mode", "float"]));
    assert!((v["value"].as_f64().unwrap() - 2.1875).abs() < 1e-12);
    // e_q(z) E_q(-z) = 1
    let e = json(&qlab(&["eval", "eq", "0.3", "--q", "0.5"]))["value"].as_f64().unwrap();
    let big = json(&qlab(&["eval", "Eq", "-0.3", "--q", "0.5"]))["value"].as_f64().unwrap();
    assert!((e * big - 1.0).abs() < 1e-13);
}

#[test]
fn eval_usage_errors_exit_2() {
    for args in [
        &["eval", "nope", "1"][..],
        &["eval", "qfact"],
        &["eval", "qfact", "x"],
        &["eval", "qfact", "3", "--q", "3/2"],
        &["eval", "trig", "tan_small", "1"],
    ] {
        let out = qlab(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn transform_examples() {
    let v = json(&qlab(&["transform", "mono:1,1", "--kind", "1", "--r", "1", "--s", "1", "--mode", "both"]));
    assert_eq!(v["value_catalog"].as_f64(), Some(1.0));
    assert!(v["rel_diff"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["status"], "pass");

    let v = json(&qlab(&["transform", "mono:0,0", "--kind", "1", "--r", "2", "--s", "3"]));
    assert!((v["value_numeric"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);

    let out = qlab(&["transform", "expqadd:0.5,0.25,small", "--kind", "1", "--r", "1", "--s", "1", "--mode", "both"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["value_catalog"].as_f64().unwrap() - 8.0 / 3.0).abs() < 1e-12);
    assert!(v["rel_diff"].as_f64().unwrap() < 1e-10);
}

#[test]
fn transform_csv_has_flat_columns() {
    let out = qlab(&["transform", "mono:1,0", "--kind", "3", "--r", "2", "--s", "1.5", "--mode", "both", "--output", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("op,kind,q,params,value_numeric,value_catalog,rel_diff,status")
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("transform,K3,1/2,"));
    assert!(row.ends_with(",pass"));
}

#[test]
fn transform_tolerance_failure_exits_1() {
    let out = qlab(&["transform", "mono:1,1", "--mode", "both", "--tol", "1e-300"]);
    // Numeric and catalog values differ in the last bits.
    if json(&out)["rel_diff"].as_f64().unwrap() > 0.0 {
        assert_eq!(code(&out), 1);
        assert_eq!(json(&out)["status"], "fail");
    }
}

#[test]
fn tolerance_env_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args(["transform", "mono:1,1", "--mode", "both", "--q", "0.7"])
        .env("Q_LAB_TOL", "1e-300")
        .output()
        .unwrap();
    let diff = json(&out)["rel_diff"].as_f64().unwrap();
    assert_eq!(code(&out), if diff > 1e-300 { 1 } else { 0 });

    let out = Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args(["transform", "mono:1,1", "--mode", "both"])
        .env("Q_LAB_TOL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn transform_divergence_exits_3() {
    let out = qlab(&["transform", "sep:esmall:5|const", "--kind", "1", "--r", "1", "--s", "1"]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("axis x"), "{err}");

    let out = qlab(&["transform", "sep:const|esmall:5", "--kind", "1", "--mode", "catalog"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("axis y"));
}

#[test]
fn transform_catalog_miss_exits_4() {
    let out = qlab(&["transform", "sep:esmall:1|const", "--kind", "2", "--mode", "catalog"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn transform_parse_errors_exit_2() {
    for args in [
        &["transform", "blob:1"][..],
        &["transform", "mono:1,1", "--kind", "5"],
        &["transform", "mono:1,1", "--r", "abc"],
        &["transform", "mono:1,1", "--k-window", "5,1"],
    ] {
        assert_eq!(code(&qlab(args)), 2, "{args:?}");
    }
}

#[test]
fn k_window_is_applied() {
    let wide = json(&qlab(&["transform", "mono:0,0", "--r", "1.7", "--k-window", "-5000,20000"]));
    assert!((wide["value_numeric"].as_f64().unwrap() - 1.0 / 1.7).abs() < 1e-12);
    let narrow = qlab(&["transform", "mono:2,1", "--kind", "2", "--k-window", "-3,5"]);
    assert_eq!(code(&narrow), 3);
}

#[test]
fn verify_identities_exact() {
    let out = qlab(&["verify", "identities", "--q", "1/2", "--mode", "exact"]);
    assert_eq!(code(&out), 0);
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert!(rows.len() > 50);
    assert!(rows.iter().all(|r| r["status"] == "pass"));
}

#[test]
fn verify_suite_errors() {
    assert_eq!(code(&qlab(&["verify", ""])), 2);
    assert_eq!(code(&qlab(&["verify"])), 2);
    assert_eq!(code(&qlab(&["verify", "everything"])), 2);
}

#[test]
fn verify_failure_exits_1() {
    let out = qlab(&["verify", "derivatives", "--q", "0.5", "--mode", "float", "--tol", "1e-300"]);
    assert_eq!(code(&out), 1);
    assert!(json(&out).as_array().unwrap().iter().any(|r| r["status"] == "fail"));
}

#[test]
fn reports_are_deterministic_and_written_to_out() {
    let path = std::env::temp_dir().join(format!("qlab-report-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let args = ["verify", "identities", "--q", "2/3", "--output", "csv", "--seed", "7", "--out", p];
    assert_eq!(code(&qlab(&args)), 0);
    let first = std::fs::read(&path).unwrap();
    assert_eq!(code(&qlab(&args)), 0);
    let second = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(!first.is_empty());
    assert_eq!(first, second);
}

#[test]
fn solve_examples() {
    let out = qlab(&["solve", "transport", "--c", "-1", "--f", "mono:2", "--g", "mono:2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["formula"].as_str().unwrap().contains("ward_add"));
    assert!(v["residual_max"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["inversion_incomplete"], false);

    let v = json(&qlab(&["solve", "abel_ward"]));
    assert!(v["formula"].as_str().unwrap().contains("e_q(-k x)"));

    let v = json(&qlab(&["solve", "wave", "--c", "1", "--f", "zero", "--g", "zero"]));
    assert_eq!(v["descriptor"], "0");
}

#[test]
fn solve_errors() {
    assert_eq!(code(&qlab(&["solve", "heat"])), 2);
    assert_eq!(code(&qlab(&["solve", "transport", "--f", "mono:x"])), 2);
}
