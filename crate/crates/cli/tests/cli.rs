use std::process::{Command, Output};

fn kodaira(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kodaira")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn curve_info_reports_both_j_conventions() {
    let out = kodaira(&["curve-info", "--lambda", "1/1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["j_invariant"]["ratio"]["a"], "1/31");
    assert_eq!(v["j_invariant"]["standard"]["a"], "6912/31");
    assert_eq!(v["delta"]["x"]["a"], "1/4");
    assert_eq!(v["delta"]["y"]["a"], "-9/8");
    assert_eq!(v["discriminant"]["a"], "-496/1");
}

#[test]
fn slope_table_rows() {
    let out = kodaira(&["slope-table", "--r-min", "8", "--r-max", "12"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "r,g,upsilon_num,upsilon_den,tau_formula\n8,7,17,8,gamma - 1\n10,8,59,28,gamma - 1\n12,9,67,32,gamma - 1\n"
    );
}

#[test]
fn genus_of_r_eight() {
    let out = kodaira(&["genus", "--r", "8", "--format", "text"]);
    assert_eq!(stdout(&out).trim(), "genus by recursion 1025, closed form 1025");
}

#[test]
fn exit_codes() {
    assert_eq!(kodaira(&["--frobnicate"]).status.code(), Some(2));
    assert_eq!(kodaira(&["genus"]).status.code(), Some(2));
    assert_eq!(kodaira(&["curve-info", "--lambda", "-27/4"]).status.code(), Some(5));
    assert_eq!(kodaira(&["curve-info", "--lambda", "0"]).status.code(), Some(5));
    assert_eq!(kodaira(&["curve-info", "--lambda", "abc"]).status.code(), Some(5));
    assert_eq!(kodaira(&["invariants", "--r", "7"]).status.code(), Some(6));
    assert_eq!(kodaira(&["k-squared", "--gamma", "2", "--r", "5"]).status.code(), Some(6));
    assert_eq!(kodaira(&["verify-config-curve", "--r", "2", "--samples", "3", "--tol", "0.5"]).status.code(), Some(2));
    assert_eq!(kodaira(&["genus", "--r", "8", "--format", "csv"]).status.code(), Some(0));
    assert_eq!(kodaira(&["k-squared", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn singular_lambda_is_rejected_before_sampling() {
    let out = kodaira(&["verify-config-curve", "--lambda", "-27/4", "--r", "3"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(out.stdout.is_empty());
}

#[test]
fn invariants_for_r_eight_gamma_two() {
    let out = kodaira(&["invariants", "--r", "8", "--gamma", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["e"], "24");
    assert_eq!(v["k_squared"], "51");
    assert_eq!(v["upsilon"], "17/8");
    assert_eq!(v["tau"], "1");
    assert_eq!(v["schema"], "1");
}

#[test]
fn k_squared_transcript_ends_with_closed_form() {
    let out = kodaira(&["k-squared", "--symbolic", "--format", "text"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().last().unwrap().starts_with("K² = "));
    let json = kodaira(&["k-squared", "--gamma", "2", "--r", "8"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["k_squared"], "51");
    assert!(v["derivation"]["transcript"]["steps"].as_array().unwrap().len() > 10);
}

#[test]
fn find_points_certificate() {
    let out = kodaira(&["find-points", "--r", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kind"], "exact");
    assert_eq!(v["multipliers"], serde_json::json!([6, 9, 12]));
    let csv = kodaira(&["find-points", "--r", "3", "--format", "csv"]);
    assert!(stdout(&csv).starts_with("index,multiplier,point\n2,6,"));
}

#[test]
fn complex_lambda_verification() {
    let out = kodaira(&["verify-config-curve", "--lambda", "0.5,0.25", "--r", "2", "--samples", "10"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["branch_count"], 4);
    assert_eq!(v["certificate_kind"], "approximate");
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_kodaira"))
        .args(["verify-config-curve", "--r", "2", "--samples", "2"])
        .env("KODAIRA_PRECISION", "128")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["precision_schedule"][0], 128);
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("kodaira-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("slopes.csv");
    let out = kodaira(&["slope-table", "--r-min", "8", "--r-max", "8", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "r,g,upsilon_num,upsilon_den,tau_formula\n8,7,17,8,gamma - 1\n");
    std::fs::remove_dir_all(&dir).unwrap();
}
