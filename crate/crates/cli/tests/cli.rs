use std::path::Path;
use std::process::{Command, Output};

fn fracspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracspec")).args(args).env_remove("FRACSPEC_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const INTERVAL: [&str; 8] = ["--domain", "interval:-1,1", "--s", "0.5", "--h", "0.0078125", "--k-max", "4"];

#[test]
fn constants_table_shows_unit_b_ns() {
    let o = fracspec(&["constants", "--N", "3", "--s", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("b_ns")).unwrap();
    assert_eq!(line.split_whitespace().nth(1), Some("1"));
    let j: serde_json::Value = serde_json::from_slice(&fracspec(&["constants", "--N", "3", "--s", "0.5", "--json"]).stdout).unwrap();
    assert_eq!(j["b_ns"], 1.0);
    assert_eq!(j["N"], 3);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["constants", "--N", "3", "--s", "1.0"],
        vec!["constants", "--N", "0", "--s", "0.5"],
        vec!["constants", "--N", "3", "--s", "0.5", "--unknown"],
        vec!["geometry", "--domain", "circle:1"],
        vec!["verify", "--suite", "nope"],
        vec!["bounds", "--domain", "interval:-1,1", "--s", "0.5", "--h", "-1", "--k-max", "3"],
        vec!["bounds", "--domain", "interval:-1,1", "--s", "0.5", "--h", "0.1", "--k-max", "0"],
        vec![],
    ] {
        assert_eq!(fracspec(&args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(fracspec(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_domain_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = fracspec(&["bounds", "--domain", "interval:1,-1", "--s", "0.5", "--h", "0.01", "--k-max", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn io_failure_exits_with_two() {
    let o = fracspec(&[&["bounds"][..], &INTERVAL, &["--out", "/nonexistent/dir/report.json"]].concat());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = fracspec(&[&["bounds"][..], &INTERVAL, &["--out", p.to_str().unwrap(), "--check"]].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(&p).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    let j: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(j["rows"].as_array().unwrap().len(), 4);
    assert_eq!(j["meta"]["domain"], "interval:-1,1");
    let csv = String::from_utf8(run("c.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("k,lambda_k,sum_lambda,liyau_lower_sum,weyl_main,kroger_upper_sum,rr_numeric_bound,cesaro_ratio,r,sigma,c1_emp")
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = [&["bounds"][..], &INTERVAL].concat();
    let one = Command::new(env!("CARGO_BIN_EXE_fracspec")).args(&args).env("FRACSPEC_THREADS", "1").output().unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_fracspec")).args(&args).env("FRACSPEC_THREADS", "2").output().unwrap();
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_fracspec")).args(&args).env("FRACSPEC_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn eig_and_geometry_outputs() {
    let o = fracspec(&[&["eig"][..], &INTERVAL, &["--format", "csv", "--extrapolate"]].concat());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("k,lambda,error,order,flagged,lambda_h,lambda_2h,lambda_4h\n"));
    assert_eq!(text.lines().count(), 5);
    let j: serde_json::Value = serde_json::from_slice(&fracspec(&[&["eig"][..], &INTERVAL].concat()).stdout).unwrap();
    assert_eq!(j["eigenvalues"].as_array().unwrap().len(), 4);
    assert_eq!(j["orders"].as_array().unwrap().len(), 0);
    assert_eq!(j["meta"]["N"], 1);
    let g: serde_json::Value = serde_json::from_slice(&fracspec(&["geometry", "--domain", "ball:1", "--json"]).stdout).unwrap();
    assert_eq!(g["R"], 1.0);
    assert_eq!(g["circum_ok"], true);
}

#[test]
fn sweep_covers_the_product_grid() {
    let o = fracspec(&["sweep", "--domain", "interval:-1,1", "--s", "0.25,0.75", "--k", "1,3", "--h", "0.0078125", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("0.25,1,") && rows[3].starts_with("0.75,3,"));
}

#[test]
fn single_suite_passes() {
    let o = fracspec(&["verify", "--suite", "constants-identity"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[PASS]"));
    assert!(Path::new(env!("CARGO_BIN_EXE_fracspec")).exists());
}

#[test]
fn estimates_report_pass_or_reject_bad_dimensions() {
    let o = fracspec(&["estimate", "plane-wave", "--N", "1", "--s", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("PASS"));
    let j: serde_json::Value = serde_json::from_slice(&fracspec(&["estimate", "cutoff", "--N", "1", "--s", "0.25", "--json"]).stdout).unwrap();
    assert_eq!(j.as_array().unwrap().len(), 2);
    assert_eq!(fracspec(&["estimate", "cutoff", "--N", "3", "--s", "0.5"]).status.code(), Some(2));
    assert_eq!(fracspec(&["estimate", "curvature", "--N", "1", "--s", "0.5"]).status.code(), Some(2));
}
