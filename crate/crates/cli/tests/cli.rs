use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphgse"))
}

fn write_model(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const SK: &str = r#"{"label": "sk", "terms": [{"p": 2, "beta_sq": 1.0}]}"#;
const TWO_FOUR_07: &str = r#"{"terms": [{"p": 2, "beta_sq": 0.7}, {"p": 4, "beta_sq": 0.3}]}"#;

#[test]
fn solve_sk() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "sk.json", SK);
    let v = json(&run(&["solve", "--model", m.to_str().unwrap()]));
    assert!((v["GSE"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-8);
    assert!(v["obstacle_margin"].as_f64().unwrap() >= -1e-9);
    assert_eq!(v["certified"], true);
    assert!(v["cross_check"]["difference"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn solve_with_field_uses_grid() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "sk.json", SK);
    let v = json(&run(&["solve", "--model", m.to_str().unwrap(), "--h", "0.5", "--grid", "1000"]));
    assert_eq!(v["method"], "grid");
    assert!(v["fallback"].is_string());
    // SK with field: GSE = sqrt(xi'(1) + h^2) = sqrt(2.25)
    assert!((v["GSE"].as_f64().unwrap() - 1.5).abs() < 1e-5, "{}", v["GSE"]);
}

#[test]
fn classify_two_plus_four() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "m.json", TWO_FOUR_07);
    let v = json(&run(&["classify", "--model", m.to_str().unwrap()]));
    assert_eq!(v["class"], "NOT_ONE_RSB");
    assert!(v["obstacle_margin"].as_f64().unwrap() < 0.0);
    assert!(v["argmin"].as_f64().unwrap() < 0.4);
    assert_eq!(v["certified"], false);
    assert!(v["gap"].is_number());
}

#[test]
fn classify_plot_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "m.json", TWO_FOUR_07);
    let out = run(&["classify", "--model", m.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,phi,eta,xi,eta_minus_xi,dfrak"));
    assert!(lines.all(|l| l.split(',').count() == 6));
}

#[test]
fn sweep_writes_table_and_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep-2p",
        "--p",
        "4",
        "--mu",
        "0.7,0.75,0.8,0.85",
        "--grid",
        "500",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&out).unwrap();
    assert!(table.starts_with("mu,y,m,c,replicon,purelike_margin,gse,gap,obstacle_margin,class\n"));
    assert_eq!(table.lines().count(), 5);
    let b = std::fs::read_to_string(dir.path().join("sweep.boundaries.csv")).unwrap();
    let mu: f64 = b
        .lines()
        .find(|l| l.starts_with("purelike,"))
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu - 0.786444).abs() < 5e-4, "{mu}");
}

#[test]
fn finite_beta_sk() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "sk.json", SK);
    let v = json(&run(&["finite-beta", "--model", m.to_str().unwrap(), "--beta", "16", "--grid", "2048"]));
    let b = v["beta_one_minus_q_star"].as_f64().unwrap();
    assert!((b - 0.5f64.sqrt()).abs() < 0.01, "{b}");
    assert_eq!(v["cells"], 2048);
}

#[test]
fn gamma_check_table() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "sk.json", SK);
    let v = json(&run(&["gamma-check", "--model", m.to_str().unwrap(), "--beta-grid", "2048"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["beta"], 128.0);
    assert_eq!(v["ground_state"]["certified"], true);
}

#[test]
fn duality_check_ansatz_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "sk.json", SK);
    let c = 0.5f64.sqrt();
    let a = dir.path().join("phi.json");
    std::fs::write(&a, format!(r#"{{"c": {c}, "atoms": [], "frsb_segments": []}}"#)).unwrap();
    let v = json(&run(&["duality-check", "--model", m.to_str().unwrap(), "--phi", a.to_str().unwrap()]));
    assert!((v["GSE"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-9);
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-8);

    let g = dir.path().join("phi.csv");
    let mut s = String::from("t,phi\n");
    for i in 0..=600 {
        s.push_str(&format!("{},{}\n", i as f64 / 600.0, c));
    }
    std::fs::write(&g, s).unwrap();
    let v = json(&run(&["duality-check", "--model", m.to_str().unwrap(), "--phi", g.to_str().unwrap()]));
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(v["certified"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sk = write_model(dir.path(), "sk.json", SK);
    let bad = write_model(dir.path(), "bad.json", r#"{"terms": [{"p": 1, "beta_sq": 1.0}]}"#);
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["solve", "--model", bad.to_str().unwrap()]), 2);
    assert_eq!(code(&["solve", "--model", sk.to_str().unwrap(), "--h", "-1"]), 2);
    assert_eq!(code(&["solve", "--model", sk.to_str().unwrap(), "--grid", "100"]), 2);
    assert_eq!(code(&["classify", "--model", sk.to_str().unwrap(), "--h", "0.1"]), 2);
    assert_eq!(code(&["finite-beta", "--model", sk.to_str().unwrap(), "--beta", "0"]), 2);
    assert_eq!(code(&["solve", "--model", sk.to_str().unwrap(), "--method", "ansatz", "--h", "1"]), 2);
    assert_eq!(code(&["sweep-2p", "--p", "2"]), 2);
    let o = bin()
        .args(["solve", "--model", sk.to_str().unwrap()])
        .env("SPHGSE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(
        dir.path(),
        "m.json",
        r#"{"terms": [{"p": 3, "beta_sq": 0.5}, {"p": 8, "beta_sq": 0.5}]}"#,
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = bin()
            .args(["solve", "--model", m.to_str().unwrap(), "--seed", "3", "--out", out.to_str().unwrap()])
            .env("SPHGSE_THREADS", "2")
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // no temporaries left behind
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 3, "{names:?}");
}
