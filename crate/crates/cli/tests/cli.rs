use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn mipt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mipt"))
        .args(args)
        .env_remove("MIPT_THREADS")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn meta(out: &Path) -> Value {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    serde_json::from_str(&std::fs::read_to_string(name).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fit_rows(input: &Path, extra: &[&str]) -> Vec<Value> {
    let mut args = vec!["fit", "--input", s(input), "--format", "json"];
    args.extend_from_slice(extra);
    let out = mipt(&args);
    ok(&out);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema"], "mipt.fit.v1");
    doc["fits"].as_array().unwrap().clone()
}

#[test]
fn minimal_config_fills_defaults_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "command = \"noclick-point\"\nL = 64\nh = 0.2\ngamma = 1.0\n");
    let out_path = dir.path().join("point.csv");
    let out = mipt(&["--config", s(&cfg), "--out", s(&out_path)]);
    ok(&out);
    let echo: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(echo["ell"], 16);
    let m = meta(&out_path);
    assert_eq!(m["config"]["anneal_restarts"], 8);
    assert_eq!(m["config"]["seed"], 0);
    assert_eq!(m["config"]["decay_window"], serde_json::json!([10.0, 60.0]));
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    let body = std::fs::read_to_string(&out_path).unwrap();
    assert!(body.starts_with("quantity,index,value\n"));
    let fq: f64 = body.lines().find(|l| l.starts_with("fq_max,")).unwrap()[7..].trim_start_matches(',').parse().unwrap();
    assert!(fq > 1.0);
}

#[test]
fn constraint_violation_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "command = \"noclick-point\"\nL = 8\nh = 0.2\ngamma = -1\n");
    let out = mipt(&["--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"]["key"], "gamma");
    assert!(e["error"]["message"].as_str().unwrap().contains("gamma ≥ 0"));

    let out = mipt(&["noclick-point", "--L", "8", "--h", "0.2", "--gamma", "-1"]);
    assert_eq!(error_json(&out)["error"]["key"], "gamma");

    let cfg = write(dir.path(), "bad.toml", "command = \"noclick-point\"\nL = 8\nh = 0.2\ngamma = 1\nwidth = 3\n");
    let e = error_json(&mipt(&["--config", s(&cfg)]));
    assert_eq!(e["error"]["key"], "width");

    let cfg = write(dir.path(), "type.toml", "command = \"noclick-point\"\nL = 8.5\nh = 0.2\ngamma = 1\n");
    let e = error_json(&mipt(&["--config", s(&cfg)]));
    assert_eq!(e["error"]["key"], "L");
    assert!(e["error"]["message"].as_str().unwrap().contains("integer"));
}

#[test]
fn flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "command = \"noclick-point\"\nL = 8\nh = 0.2\ngamma = 1.0\nseed = 3\n");
    let out_path = dir.path().join("p.json");
    ok(&mipt(&["--config", s(&cfg), "--seed=7", "--format", "json", "--out", s(&out_path)]));
    assert_eq!(meta(&out_path)["config"]["seed"], 7);
    assert_eq!(meta(&out_path)["run"]["anneal_seed"], 7);
}

#[test]
fn thread_count_from_environment() {
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["noclick-point", "--L", "8", "--h", "0.2", "--gamma", "1"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_mipt")).args(&args).env("MIPT_THREADS", env).output().unwrap()
    };
    let out = run("2", &[]);
    ok(&out);
    let m: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(m["threads"], 2);
    let out = run("2", &["--threads", "1"]);
    let m: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(m["threads"], 1);
    assert_eq!(error_json(&run("many", &[]))["error"]["key"], "threads");
}

#[test]
fn ensemble_summary_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["ensemble", "--L", "16", "--h", "0.2", "--gamma", "5", "--trajectories", "20", "--tmax", "4", "--seed", "11"];
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let mut args = base.to_vec();
        args.extend_from_slice(&["--out", s(p)]);
        ok(&mipt(&args));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let seeds = meta(&a)["run"]["seeds"].as_array().unwrap().len();
    assert_eq!(seeds, 20);

    let j = dir.path().join("e.json");
    let mut args = base.to_vec();
    args.extend_from_slice(&["--format", "json", "--out", s(&j)]);
    ok(&mipt(&args));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
    assert_eq!(doc["schema"], "mipt.ensemble.v1");
    let fq = doc["summary"]["stationary"]["fq_max"]["mean"].as_f64().unwrap();
    assert!(fq >= 1.0 && fq < 4.0, "{fq}");
    assert_eq!(doc["summary"]["trajectories"], 20);

    for input in [&a, &j] {
        let rows = fit_rows(input, &[]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0]["label"], "xx");
    }
}

#[test]
fn smoke_scan_within_budget_and_refits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.toml",
        "command = \"noclick-scan\"\nh_values = [0.2, 0.4, 0.6]\ngamma_values = [0.1, 0.5, 1.2]\ngamma_relative = true\nsizes = [16, 24, 32, 40]\nseed = 5\n",
    );
    let csv = dir.path().join("scan.csv");
    let clock = Instant::now();
    ok(&mipt(&["--config", s(&cfg), "--out", s(&csv)]));
    assert!(clock.elapsed().as_secs() < 300);
    let body = std::fs::read_to_string(&csv).unwrap();
    let p: Vec<f64> = body
        .lines()
        .filter(|l| l.contains(",fit,"))
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert_eq!(p.len(), 9);
    let rows = fit_rows(&csv, &[]);
    assert_eq!(rows.len(), 9);
    for (row, want) in rows.iter().zip(&p) {
        assert!((row["exponent"].as_f64().unwrap() - want).abs() < 1e-12);
    }
    let json = dir.path().join("scan.json");
    ok(&mipt(&["--config", s(&cfg), "--format", "json", "--out", s(&json)]));
    let rows = fit_rows(&json, &[]);
    for (row, want) in rows.iter().zip(&p) {
        assert!((row["exponent"].as_f64().unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn every_output_round_trips_through_fit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str], name: &str| -> PathBuf {
        let p = d.join(name);
        let mut a = args.to_vec();
        a.extend_from_slice(&["--out", s(&p)]);
        ok(&mipt(&a));
        p
    };
    let point = ["noclick-point", "--L", "128", "--h", "0.2", "--gamma", "0.3", "--anneal-restarts", "2"];
    for fmt in ["csv", "json"] {
        let p = run(&[&point[..], &["--format", fmt]].concat(), &format!("point.{fmt}"));
        let rows = fit_rows(&p, &[]);
        assert_eq!(rows[0]["label"], "cxx_ansatz");
        let lambda = rows[0]["exponent"].as_f64().unwrap();
        assert!(lambda > 0.3 && lambda < 0.7, "{lambda}");
    }

    let cfg_fit = write(d, "fit.toml", "command = \"fit\"\ndecay_window = [1, 8]\n");
    let traj = ["trajectory", "--L", "16", "--h", "0.2", "--gamma", "2", "--tmax", "2", "--seed", "3"];
    for fmt in ["csv", "json"] {
        let p = run(&[&traj[..], &["--format", fmt]].concat(), &format!("traj.{fmt}"));
        let rows = fit_rows(&p, &[]);
        assert!(rows[0]["error"].as_str().unwrap().contains("fit window"), "{}", rows[0]);
        let rows = fit_rows(&p, &["--config", s(&cfg_fit)]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0]["label"], "xx");
        assert!(rows[0]["exponent"].is_f64(), "{}", rows[0]);
    }
    let csv = std::fs::read_to_string(d.join("traj.csv")).unwrap();
    assert!(csv.starts_with("t,observable,index,value\n"));

    for (fmt, name) in [("csv", "corr.csv"), ("json", "corr.json")] {
        let p = run(&["correlators", "--L", "160", "--h", "0.2", "--gamma", "0.3", "--format", fmt], name);
        let rows = fit_rows(&p, &[]);
        assert_eq!(rows.len(), 5);
        let xx = rows.iter().find(|r| r["label"] == "xx").unwrap();
        assert!(xx["error"].is_null(), "{xx}");
        assert_eq!(xx["quantity"], "lambda");
    }

    let cfg = write(d, "tensor.toml", "command = \"correlators\"\nL = 16\nh = 0.2\ngamma = 1.0\ntensor = true\ndecay_window = [1, 8]\n");
    let t = run(&["--config", s(&cfg)], "tensor.csv");
    assert!(std::fs::read_to_string(&t).unwrap().starts_with("alpha,beta,i,j,re,im\n"));
    let c = run(&["correlators", "--L", "16", "--h", "0.2", "--gamma", "1.0"], "ctilde.csv");
    let from_tensor = fit_rows(&t, &["--config", s(&cfg_fit)]);
    let from_ctilde = fit_rows(&c, &["--config", s(&cfg_fit)]);
    for (a, b) in from_tensor.iter().zip(&from_ctilde) {
        assert_eq!(a["label"], b["label"]);
        let (x, y) = (a["exponent"].as_f64().unwrap(), b["exponent"].as_f64().unwrap());
        assert!((x - y).abs() < 1e-6, "{a} {b}");
    }

    let f = run(&["fit", "--input", s(&c)], "fit.csv");
    let e = error_json(&mipt(&["fit", "--input", s(&f)]));
    assert_eq!(e["error"]["kind"], "input");
}

#[test]
fn runtime_errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = mipt(&["fit", "--input", s(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "io");
    let e = error_json(&mipt(&["--L", "8"]));
    assert_eq!(e["error"]["key"], "command");
    let e = error_json(&mipt(&["noclick-point", "--L", "x"]));
    assert_eq!(e["error"]["kind"], "usage");
}
