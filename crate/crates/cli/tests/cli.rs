use std::path::Path;
use std::process::{Command, Output};

use hslab::{best_constant, el_normalization_constant, ProblemParams};
use serde_json::Value;

fn hslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hslab"))
        .args(args)
        .env_remove("HSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn constant_prints_mu_and_c() {
    let v = json(&hslab(&["constant", "--N", "4", "--gamma", "0.5", "--s", "1.0"]));
    let p = ProblemParams::new(4, 0.5, 1.0).unwrap();
    assert_eq!(v["mu"].as_f64().unwrap(), best_constant(&p));
    assert_eq!(v["C"].as_f64().unwrap(), el_normalization_constant(&p));
}

#[test]
fn reference_mode_unlocks_sobolev() {
    let out = hslab(&["constant", "--N", "3", "--gamma", "0", "--s", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&hslab(&["constant", "--N", "3", "--gamma", "0", "--s", "0", "--reference-mode"]));
    let want = 0.75 * (2.0 * std::f64::consts::PI.powi(2)).powf(2.0 / 3.0);
    assert!((v["mu"].as_f64().unwrap() - want).abs() < 1e-12 * want);
}

#[test]
fn bubble_has_zero_deficit() {
    let v = json(&hslab(&[
        "deficit", "--N", "4", "--gamma", "0.5", "--s", "1.0", "--bubble", "--lambda", "2", "--coeff", "1.5",
    ]));
    let d = v["deficit"].as_f64().unwrap();
    assert!(d.abs() < 1e-10 * v["gamma_norm_sq"].as_f64().unwrap(), "{d}");
}

#[test]
fn spectrum_file_has_the_second_eigenvalue_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.json");
    let out = hslab(&["spectrum", "--N", "3", "--gamma", "0.1", "--s", "0.5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
    let ratio = v["eta2"].as_f64().unwrap() / v["eta1"].as_f64().unwrap();
    assert!((ratio - (p.critical_exponent() - 1.0)).abs() < 1e-6, "{ratio}");
    assert_eq!(v["kernel_dim"].as_u64(), Some(1));
}

#[test]
fn distance_recovers_a_bubble() {
    let v = json(&hslab(&[
        "distance", "--N", "4", "--gamma", "0.5", "--s", "1", "--bubble", "--lambda", "0.3", "--coeff", "2",
    ]));
    assert!((v["lambda"].as_f64().unwrap() / 0.3 - 1.0).abs() < 1e-7);
    assert!((v["c"].as_f64().unwrap() / 2.0 - 1.0).abs() < 1e-7);
    assert!(v["distance"].as_f64().unwrap() < 1e-6);
}

#[test]
fn fit_bubbles_finds_two_scales() {
    let v = json(&hslab(&["fit-bubbles", "--N", "6", "--gamma", "0.4", "--s", "0.5", "--lambdas", "1,1e-3"]));
    let l: Vec<f64> = v["bubbles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["bubble"]["lambda"].as_f64().unwrap())
        .collect();
    assert!((l[0] / 1e-3 - 1.0).abs() < 1e-2, "{l:?}");
    assert!((l[1] - 1.0).abs() < 1e-2, "{l:?}");
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(hslab(&["constant", "--N", "4", "--gamma", "9", "--s", "1"]).status.code(), Some(2));
    assert_eq!(hslab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hslab(&["constant", "--N", "4"]).status.code(), Some(2));
    let grid = ["stability-scan", "--N", "4", "--gamma", "0.5", "--s", "1", "--d-grid", "0.01,0.02"];
    assert_eq!(hslab(&grid).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let out = hslab(&[
        "interaction-scan", "--N", "3", "--gamma", "0.1", "--s", "0.5", "--lambda-min", "1e-300", "--lambda-max", "1e-290",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn csv_in_directory_is_named_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = |threads: &'static str| {
        vec![
            "--threads", threads, "stability-scan", "--N", "4", "--gamma", "0.5", "--s", "1", "--kind",
            "random-orthogonal", "--seed", "7", "--out", d,
        ]
    };
    assert!(hslab(&args("1")).status.success());
    let path = dir.path().join("stability-scan_4_0.5_1.csv");
    let first = read(&path);
    assert!(hslab(&args("3")).status.success());
    assert_eq!(first, read(&path));
    let header = first.lines().next().unwrap();
    assert!(header.starts_with("# config: "));
    let config: Value = serde_json::from_str(header.trim_start_matches("# config: ")).unwrap();
    assert_eq!(config["command"], "stability-scan");
    assert_eq!(config["args"]["seed"], 7);
    assert_eq!(config["args"]["kind"], "random-orthogonal");
    assert!(first.lines().nth(1).unwrap().starts_with("d,d_used,deficit,distance,ratio"));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alpha.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_hslab"))
        .args(["alpha-table", "--dims", "3,4", "--gamma-fractions", "0.5", "--s-values", "1", "--out"])
        .arg(&path)
        .env("HSLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&path);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "N,gamma,s,eta1,eta2,eta3,alpha,eta2_over_eta1,error");
    assert_eq!(lines.len(), 4);
}

#[test]
fn every_scan_writes_csv_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let p = ["--N", "3", "--gamma", "0.1", "--s", "0.5", "--out", d];
    let runs: [(&str, &[&str]); 4] = [
        ("interaction-scan", &["--points", "10", "--lambda-min", "1e-4", "--lambda-max", "1e-1"]),
        ("cfm-scan", &["--family-size", "1", "--d-grid", "0.02,0.01"]),
        ("constant", &[]),
        ("deficit", &["--bump", "0.2", "0", "1.5"]),
    ];
    for (cmd, extra) in runs {
        let mut args = vec![cmd];
        args.extend(p);
        args.extend(extra);
        let out = hslab(&args);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let text = read(&dir.path().join(format!("{cmd}_3_0.1_0.5.csv")));
        assert!(text.starts_with("# config: {"), "{cmd}");
    }
}
