use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altzeta")).args(args).env_remove("ALTZETA_SEED").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = run(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn assert_usage_error(args: &[&str], needle: &str) {
    let out = run(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err:?}");
    assert!(err.contains(needle), "{err:?}");
    assert!(out.stdout.is_empty());
}

#[test]
fn eta_series_at_one() {
    let v = json(&["eta", "--s", "1", "--N", "32", "--method", "series"]);
    let re = v["results"][0]["re"].as_f64().unwrap();
    // η_32(1) differs from ln 2 by about 1/(4N)
    assert!((re - std::f64::consts::LN_2).abs() < 1e-2);
    assert_eq!(v["results"][0]["method"], "series");
    assert_eq!(v["results"][0]["N"], 32);
}

#[test]
fn eta_all_methods_agree() {
    let v = json(&["eta", "--s", "2", "--N", "8", "--method", "all"]);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    let first = results[0]["re"].as_f64().unwrap();
    for r in results {
        assert!((r["re"].as_f64().unwrap() - first).abs() < 1e-12 * first);
    }
    assert_eq!(v["diagnostics"]["agree"], true);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["command", "params", "results", "diagnostics"]);
    let out = run(&["eta", "--s", "2", "--N", "8", "--method", "all", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tridiagonal_at_zero_is_a_usage_error() {
    assert_usage_error(&["eta", "--s", "0", "--N", "8", "--method", "tridiag"], "tridiagonal form undefined at s=0");
}

#[test]
fn error_paths_print_one_line() {
    assert_usage_error(&["eta", "--N", "4"], "missing --s");
    assert_usage_error(&["eta", "--s", "1+", "--N", "4"], "cannot parse s");
    assert_usage_error(&["eta", "--s", "1", "--N", "4", "--bogus"], "unexpected argument");
    assert_usage_error(&["eta", "--s", "-2", "--N", "4", "--method", "mc"], "within");
    assert_usage_error(&["eta", "--s", "-2", "--N", "4", "--method", "contfrac"], "breaks down");
    assert_usage_error(&["mc", "--s", "1", "--N", "4", "--samples", "0"], "--samples");
    assert_usage_error(&["mc", "--s", "1", "--N", "4", "--thinning", "0"], "thinning");
    assert_usage_error(&["ratio", "--s", "1", "--u", "3,2"], "invalid grid");
    assert_usage_error(&["suite", "--scope", "everything"], "unknown scope");
    assert_usage_error(
        &["ensemble", "--ensemble", "jacobi", "--N", "2", "--a", "1", "--b", "1", "--s", "2"],
        "Re(a - s/2)",
    );
    assert_usage_error(&["convergence", "--s", "1", "--N-range", "4,x"], "--N-range");
    assert_usage_error(&["frobnicate"], "unrecognized subcommand");
}

#[test]
fn seed_from_environment() {
    let base = ["mc", "--s", "1", "--N", "3", "--samples", "2000", "--format", "csv"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_altzeta")).args(base).env("ALTZETA_SEED", "9").output().unwrap();
    let mut flagged = base.to_vec();
    flagged.extend(["--seed", "9"]);
    assert_eq!(with_env.stdout, run(&flagged).stdout);
    assert_ne!(with_env.stdout, run(&base).stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_altzeta")).args(base).env("ALTZETA_SEED", "nine").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for format in ["csv", "json"] {
        let args = [
            "ensemble",
            "--ensemble",
            "laguerre",
            "--N",
            "2",
            "--a",
            "3",
            "--s",
            "1",
            "--samples",
            "4000",
            "--seed",
            "5",
            "--format",
            format,
        ];
        let (a, b) = (run(&args), run(&args));
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn convergence_tables() {
    let v = json(&["convergence", "--s", "1", "--N-range", "4,8,16,32"]);
    let errors: Vec<f64> = v["results"].as_array().unwrap().iter().map(|r| r["abs_error"].as_f64().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(v["diagnostics"]["error_decreasing"], true);

    let v = json(&["convergence", "--s", "0", "--N-range", "2..6"]);
    assert!(v["results"].as_array().unwrap().iter().all(|r| r["abs_error"].as_f64().unwrap() < 1e-14));

    let v = json(&["convergence", "--s", "-2", "--N-range", "3..8"]);
    assert!(v["results"].as_array().unwrap().iter().all(|r| r["re"].as_f64().unwrap().abs() < 1e-13));
}

#[test]
fn csv_headers_are_fixed() {
    let header = |args: &[&str]| {
        let mut full = args.to_vec();
        full.extend(["--format", "csv"]);
        stdout(&run(&full)).lines().next().unwrap().to_string()
    };
    assert_eq!(header(&["eta", "--s", "2", "--N", "4"]), "method,N,re,im,std_error,n_samples,condition_estimate");
    assert_eq!(header(&["convergence", "--s", "2"]), "N,re,im,abs_error,decreasing");
    assert_eq!(header(&["ratio", "--s", "2", "--u", "1,2", "--samples", "100"]), "quantity,re,im,std_error,n_samples");
    assert_eq!(header(&["suite", "--scope", "exact"]), "group,criterion,check,passed,measured,bound");
}

#[test]
fn mc_matches_series() {
    let v = json(&["mc", "--s", "2", "--N", "4", "--samples", "1e5"]);
    assert!(v["diagnostics"]["z_score"].as_f64().unwrap() < 4.0);
    assert_eq!(v["params"]["samples"], 100000);
}

#[test]
fn psi_ratio_and_selberg() {
    let v = json(&["psi", "--s", "2", "--N", "4", "--x", "1,2", "--samples", "20000"]);
    for x in ["x=1", "x=2"] {
        assert!(v["diagnostics"]["z_score"][x].as_f64().unwrap() < 4.0);
    }
    let v = json(&["ratio", "--s", "-1", "--u", "1,2,3", "--samples", "20000"]);
    assert!(v["diagnostics"]["relative_difference"].as_f64().unwrap() < 1e-12);
    assert!(v["diagnostics"]["z_score"].as_f64().unwrap() < 4.0);
    let v = json(&["selberg-check", "--ensemble", "jacobi", "--N", "2", "--a", "2", "--b", "3"]);
    assert_eq!(v["diagnostics"]["passed"], true);
    let out = run(&["selberg-check", "--ensemble", "jacobi", "--N", "2", "--a", "2", "--b", "3", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn suite_exact_scope_passes() {
    let out = run(&["suite", "--scope", "exact", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["diagnostics"]["passed"], true);
    assert!(v["results"].as_array().unwrap().iter().all(|r| r["passed"] == true));
}
