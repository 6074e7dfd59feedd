use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tailratio"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

struct Files {
    _dir: tempfile::TempDir,
    exp: String,
    osc: String,
    pareto: String,
    uniform: String,
    root: PathBuf,
}

fn files() -> Files {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let exp = write(&root, "exp1.json", r#"{"family":"exponential","rate":1.0}"#);
    let osc = write(&root, "osc.json", r#"{"family":"osc_squares"}"#);
    let pareto = write(&root, "pareto.json", r#"{"family":"pareto","alpha":2.0}"#);
    let knots: Vec<String> = (0..200).map(|i| {
        let x = i as f64 / 200.0;
        format!("[{x},{}]", -(1.0 - x).ln())
    }).chain(std::iter::once(format!("[1,{}]", (400f64).ln()))).collect();
    let uniform = write(&root, "u.json", &format!(r#"{{"family":"piecewise_logtail","interpolation":"linear","knots":[{}]}}"#, knots.join(",")));
    let s = |p: PathBuf| p.to_str().unwrap().to_string();
    Files { exp: s(exp), osc: s(osc), pareto: s(pareto), uniform: s(uniform), root, _dir: dir }
}

#[test]
fn classify_reports_regime() {
    let f = files();
    let o = run(&["classify", "--spec", &f.exp, "--xmax", "1000"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["regime"], "nearly_convex");
    assert_eq!(v["delta"], 0.0);
}

#[test]
fn witness_json_report() {
    let f = files();
    let o = run(&["witness", "--spec", &f.osc, "--eta", "5", "--d", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["m"], 25.0);
    assert!(v["construction_measure"].as_f64().unwrap() >= 11.0 - 1e-9);
    assert_eq!(v["trace"]["m1"], 25.0);
    let o = run(&["witness", "--spec", &f.osc, "--eta", "5", "--d", "1", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "regime,m,d,eta,measure,certified_log_bound,true_log_ratio_lo,true_log_ratio_hi");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let bound: f64 = row[5].parse().unwrap();
    let hi: f64 = row[7].parse().unwrap();
    assert!(bound <= hi);
}

#[test]
fn ratio_row_contains_closed_form() {
    let f = files();
    let o = run(&["ratio", "--spec", &f.exp, "--weights", "0.5,0.5", "--m", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "m,log_sum_tail_lo,log_sum_tail_hi,log_product_tail,log_ratio_lo,log_ratio_hi,method");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (lo, hi): (f64, f64) = (row[4].parse().unwrap(), row[5].parse().unwrap());
    assert!(lo <= 21f64.ln() && 21f64.ln() <= hi);
}

#[test]
fn out_flag_and_determinism() {
    let f = files();
    let a = f.root.join("a.csv");
    let b = f.root.join("b.csv");
    for p in [&a, &b] {
        let o = run(&["simulate-club", "--spec", &f.uniform, "--r", "0.3", "--steps", "300", "--seed", "4", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("step,candidate_lo,candidate_hi,vote_fraction,admitted,club_size,q_t\n"));
    assert_eq!(text.lines().count(), 301);
}

#[test]
fn simulate_from_run_config() {
    let f = files();
    let cfg = write(&f.root, "run.json", r#"{"spec":{"family":"exponential","rate":1.0},"r":0.4,"steps":50,"seed":9}"#);
    let o = run(&["simulate-club", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 51);
}

#[test]
fn other_subcommands_emit_csv_or_json() {
    let f = files();
    let o = run(&["minorant", "--spec", &f.osc, "--xmax", "400"]);
    assert!(o.status.success() && stdout(&o).starts_with("x,h,slope\n"));
    let o = run(&["lset", "--spec", &f.osc, "--m", "9", "--d", "1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["measure"].as_f64().unwrap() - 24.0).abs() < 1e-9);
    let o = run(&["lset", "--spec", &f.exp, "--spec2", &f.pareto, "--m", "5", "--d", "1", "--j", "1"]);
    assert!(o.status.success());
    let o = run(&["bound", "--spec", &f.exp, "--d", "0", "--m", "5"]);
    let text = stdout(&o);
    assert!(text.starts_with("m,d,measure,reduction_bound,doubling_bound,certified\n"));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[3].parse::<f64>().unwrap() - 10f64.ln()).abs() < 1e-9);
    let o = run(&["bound", "--spec", &f.exp, "--d", "0", "--m", "2", "--weights", "0.333333333333333333,0.333333333333333333,0.333333333333333334"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn conjecture_scan_matches_ratio() {
    let f = files();
    let o = run(&["conjecture-scan", "--spec", &f.exp, "--spec2", &f.exp, "--lambdas", "0.5", "--m-lo", "1", "--m-hi", "1000", "--m-ratio", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("lambda,best_m,max_log_ratio_lo,max_log_ratio_hi,exceeds_1,exceeds_2,exceeds_5,note\n"));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "1000");
    let (lo, hi): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
    assert!(lo <= 2001f64.ln() + 1e-9 && 2001f64.ln() <= hi + 1e-9);
    let r = run(&["ratio", "--spec", &f.exp, &f.exp, "--m", "1000"]);
    let rrow: Vec<String> = stdout(&r).lines().nth(1).unwrap().split(',').map(String::from).collect();
    assert_eq!(rrow[4], row[2]);
    assert!(text.contains("evidence, not proof"));
}

#[test]
fn exit_codes_and_error_json() {
    let f = files();
    let o = run(&["ratio", "--spec", "/nonexistent.json", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["code"], "io");
    let bad = write(&f.root, "bad.json", r#"{"family":"loglog","rate":1}"#);
    let o = run(&["classify", "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["code"], "invalid_spec");
    let o = run(&["witness", "--spec", &f.osc, "--eta", "30", "--d", "1", "--xmax", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_json(&o);
    assert_eq!(e["code"], "range");
    assert_eq!(e["context"]["command"], "witness");
    assert!(e["message"].is_string());
    let o = run(&["nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["code"], "usage");
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_env_is_validated() {
    let f = files();
    let o = bin().args(["bound", "--spec", &f.exp, "--d", "0", "--m", "5"]).env("TAILRATIO_THREADS", "x").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["bound", "--spec", &f.exp, "--d", "0", "--m", "5"]).env("TAILRATIO_THREADS", "2").output().unwrap();
    assert!(o.status.success());
}
