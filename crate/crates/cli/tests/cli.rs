use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dsim(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["simulate", "--model", "sbm", "--drift", "sin", "--H", "0.3", "--lambda", "1.2", "--grid", "geometric", "--T", "6", "--M", "100", "--seed", "7", "--out", "a.csv"],
    );
    let csv = fs::read_to_string(d.path().join("a.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("k,t,x"));
    assert_eq!(csv.lines().count(), 602);
    let side = json(&fs::read_to_string(d.path().join("a.json")).unwrap());
    assert_eq!(side["seed"], 7);
    assert_eq!(side["H"], 0.3);
    assert_eq!(side["T"], 6);
    assert_eq!(side["M"], 100);
    assert_eq!(side["model"], "sbm[drift=sin]");

    ok(d.path(), &["simulate", "--model", "sbm", "--drift", "none", "--H", "0.8", "--alpha", "1.05", "--T", "6", "--M", "500", "--seed", "1", "--out", "b.csv"]);
    assert_eq!(fs::read_to_string(d.path().join("b.csv")).unwrap().lines().count(), 3002);
}

#[test]
fn config_file_and_flag_precedence() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("run.json"),
        r#"{"model": "sbm", "H": 0.3, "alpha": 1.1, "T": 4, "M": 10, "seed": 2, "drift": "random"}"#,
    )
    .unwrap();
    ok(d.path(), &["simulate", "--config", "run.json", "--H", "0.7", "--out", "p.csv"]);
    let side = json(&fs::read_to_string(d.path().join("p.json")).unwrap());
    assert_eq!(side["H"], 0.7);
    assert_eq!(side["M"], 10);
    assert_eq!(side["model"], "sbm[drift=random]");
}

#[test]
fn usage_and_domain_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(dsim(d.path(), &["simulate", "--H", "0.8", "--T", "6", "--M", "5", "--alpha", "1.1", "--out", "x.csv"]).status.code(), Some(2));
    assert_eq!(dsim(d.path(), &["frobnicate"]).status.code(), Some(2));
    let bad_h = dsim(d.path(), &["simulate", "--H=-1", "--T", "6", "--M", "5", "--alpha", "1.1", "--seed", "1", "--out", "x.csv"]);
    assert_eq!(bad_h.status.code(), Some(3));
    let bad_drift = dsim(d.path(), &["simulate", "--H", "0.5", "--drift", "wobbly", "--T", "6", "--M", "5", "--alpha", "1.1", "--seed", "1", "--out", "x.csv"]);
    assert_eq!(bad_drift.status.code(), Some(3));
}

#[test]
fn verify_cov_report() {
    let d = tempfile::tempdir().unwrap();
    let v = json(&ok(d.path(), &["verify-cov", "--seed", "3", "--M", "200"]));
    assert!((v["analytic"].as_f64().unwrap() - 2.86872).abs() < 1e-5);
    for k in ["lhs", "rhs"] {
        assert!(v[k].as_f64().unwrap() > 0.0);
    }
    for k in ["lhs_rhs", "lhs_analytic", "rhs_analytic"] {
        assert!(v["rel_gaps"][k].is_number());
    }
    assert_eq!(v["params"]["n"], 9);
    assert_eq!(v["params"]["tau"], 20);
}

#[test]
fn verify_cov_rejects_exact_dsi_path() {
    let d = tempfile::tempdir().unwrap();
    // X(alpha^(kT+j)) = lambda^(kH) on T = 2, H = 0.5, alpha = 1.1
    let mut csv = String::from("k,t,x\n");
    for k in 0..=20 {
        let t = 1.1f64.powi(k);
        let x = 1.1f64.powf((k / 2) as f64 * 2.0 * 0.5);
        csv.push_str(&format!("{k},{t:.11e},{x:.11e}\n"));
    }
    fs::write(d.path().join("dsi.csv"), csv).unwrap();
    fs::write(
        d.path().join("dsi.json"),
        r#"{"model": "fixture", "seed": null, "H": 0.5, "alpha": 1.1, "T": 2, "M": 10, "grid": "geometric", "lambda": 1.21}"#,
    )
    .unwrap();
    let out = dsim(d.path(), &["verify-cov", "--from-path", "dsi.csv", "--n", "1", "--tau", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("variance"));
}

#[test]
fn estimate_hurst_on_simulated_and_saved_paths() {
    let d = tempfile::tempdir().unwrap();
    let v = json(&ok(
        d.path(),
        &["estimate-hurst", "--H", "0.8", "--lambda", "1.2", "--M", "30", "--T", "200", "--drift", "random", "--seed", "11"],
    ));
    assert!((v["h1"].as_f64().unwrap() - 0.8).abs() < 0.1);
    assert_eq!(v["mu1"].as_array().unwrap().len(), 29);
    assert!(v.get("mle").is_none());

    ok(d.path(), &["simulate", "--H", "0.5", "--lambda", "1.2", "--M", "20", "--T", "100", "--grid", "equispaced", "--drift", "random", "--seed", "4", "--out", "e.csv"]);
    let v = json(&ok(d.path(), &["estimate-hurst", "--from-path", "e.csv", "--mle"]));
    assert!((v["mle"]["hurst"].as_f64().unwrap() - 0.5).abs() < 0.15);
    assert_eq!(v["mle"]["family"], "sbm-random-drift");

    ok(d.path(), &["simulate", "--H", "0.5", "--alpha", "1.2", "--M", "5", "--T", "3", "--seed", "4", "--out", "g.csv"]);
    assert_eq!(dsim(d.path(), &["estimate-hurst", "--from-path", "g.csv"]).status.code(), Some(3));
}

#[test]
fn estimate_hurst_exact_on_self_similar_input() {
    let d = tempfile::tempdir().unwrap();
    let (lambda, t, m) = (1.2f64, 5usize, 4usize);
    let mut csv = String::from("k,t,x\n");
    for i in 0..m {
        for k in 0..t {
            let u = 1.0 + k as f64 * (lambda - 1.0) / t as f64;
            let x = lambda.powf(0.5 * i as f64) * (u * u + u.sin());
            csv.push_str(&format!("{},{:.11e},{x:.11e}\n", i * t + k, lambda.powi(i as i32) * u));
        }
    }
    fs::write(d.path().join("s.csv"), csv).unwrap();
    fs::write(
        d.path().join("s.json"),
        r#"{"model": "fixture", "seed": null, "H": null, "alpha": null, "T": 5, "M": 4, "grid": "equispaced", "lambda": 1.2}"#,
    )
    .unwrap();
    let v = json(&ok(d.path(), &["estimate-hurst", "--from-path", "s.csv"]));
    // the CSV carries 12 significant digits
    assert!((v["h1"].as_f64().unwrap() - 0.5).abs() < 1e-7);
    assert!((v["h2"].as_f64().unwrap() - 0.5).abs() < 1e-7);
}

#[test]
fn spectral_outputs() {
    let d = tempfile::tempdir().unwrap();
    let csv = ok(d.path(), &["spectral", "--model", "sbm", "--H", "0.8", "--alpha", "1.05", "--T", "6"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("omega,j,r,re,im"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..3], &["0.00000000000e0", "0", "0"]);
    assert!((first[3].parse::<f64>().unwrap() - 2.597).abs() < 1e-3);
    assert_eq!(csv.lines().count(), 1 + 256 * 36);

    ok(d.path(), &["simulate", "--H", "0.8", "--alpha", "1.05", "--T", "6", "--M", "300", "--seed", "2", "--out", "p.csv"]);
    ok(d.path(), &["spectral", "--from-path", "p.csv", "--omega-points", "8", "--out", "s.csv", "--q-out", "q.csv"]);
    let side = json(&fs::read_to_string(d.path().join("s.json")).unwrap());
    assert_eq!(side["source"], "estimated");
    assert!(side["estimate"]["H_used"].is_number());
    assert!(side["rho"].as_f64().unwrap().abs() < 1.0);
    let q = fs::read_to_string(d.path().join("q.csv")).unwrap();
    assert!(q.starts_with("n,tau,j,k,value\n"));
    assert_eq!(q.lines().count(), 1 + 13 * 36);

    fs::write(d.path().join("bad.json"), r#"{"H": 0.5, "alpha": 1.1, "T": 3, "r0": [1, 1, 1], "r1": [0.5, 2.0, 0.5]}"#).unwrap();
    let out = dsim(d.path(), &["spectral", "--table", "bad.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("R_1(1)"));
}

#[test]
fn mae_bench_files() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["mae-bench", "--hursts", "0.5", "--T", "20", "--M", "5", "--reps", "3", "--seed", "1", "--out", "mae.csv"]);
    let mae = fs::read_to_string(d.path().join("mae.csv")).unwrap();
    let rows: Vec<&str> = mae.lines().collect();
    assert_eq!(rows[0], "H_true,estimator,mae,n_reps");
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("5.00000000000e-1,MLE,"));
    let samples = fs::read_to_string(d.path().join("mae_samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 9);
    let side = json(&fs::read_to_string(d.path().join("mae.json")).unwrap());
    assert_eq!(side["reps"], 3);

    ok(d.path(), &["mae-bench", "--hursts", "0.5", "--T", "20", "--M", "5", "--reps", "2", "--seed", "1", "--no-mle", "--out", "m2.csv"]);
    assert_eq!(fs::read_to_string(d.path().join("m2.csv")).unwrap().lines().count(), 3);
}
