use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let fx = Self { dir: TempDir::new().unwrap() };
        fx.write("theta.json", r#"{"zeros": [[0,0],[0,0]], "constant": [1,0]}"#);
        fx.write("zbar.json", r#"{"min_index": -1, "coeffs": [[1,0]]}"#);
        fx.write("w.json", r#"{"min_index": 1, "coeffs": [[1,0]]}"#);
        fx.write("w_plus.json", r#"{"min_index": 0, "coeffs": [[0.3,0],[1,0]]}"#);
        fx.write("w_tiny.json", r#"{"min_index": 0, "coeffs": [[1e-6,0],[1,0]]}"#);
        fx.write("const.json", r#"{"min_index": 0, "coeffs": [[2,-1]]}"#);
        fx
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn mskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mskit")).args(args).env("MSKIT_THREADS", "2").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn check_zero(fx: &Fixture, f: &str, g: &str, extra: &[&str]) -> (i32, String) {
    let (t, f, g) = (fx.path("theta.json"), fx.path(f), fx.path(g));
    let mut args = vec!["check-zero", s(&t), s(&f), s(&g), "--truncation", "64"];
    args.extend_from_slice(extra);
    let out = mskit(&args);
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn cond4_instance_has_zero_alpha_and_beta() {
    let fx = Fixture::new();
    let (code, out) = check_zero(&fx, "zbar.json", "w.json", &["--oracle"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["condition"], "4");
    for key in ["alpha", "beta"] {
        let z = v[key].as_array().unwrap();
        assert!(z.iter().all(|c| c.as_f64().unwrap().abs() < 1e-10), "{key}: {z:?}");
    }
    assert!(v["oracle_norm"].as_f64().unwrap() < 1e-7);
    assert!(v["residuals"].is_object());
}

#[test]
fn constant_f_is_condition_two() {
    let fx = Fixture::new();
    let (code, out) = check_zero(&fx, "const.json", "w_plus.json", &[]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["condition"], "2");
}

#[test]
fn perturbed_symbol_is_a_valid_none_verdict() {
    let fx = Fixture::new();
    let (code, out) = check_zero(&fx, "zbar.json", "w_plus.json", &["--oracle"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["condition"], "none");
    assert!(v["oracle_norm"].as_f64().unwrap() > 1e-3);
}

#[test]
fn tiny_perturbation_is_indeterminate() {
    let fx = Fixture::new();
    let (code, out) = check_zero(&fx, "zbar.json", "w_tiny.json", &["--oracle"]);
    assert_eq!(code, 4);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["oracle_class"], "indeterminate");
}

#[test]
fn oracle_disagreement_maps_to_exit_three() {
    use mskit::cli::oracle_exit_code;
    use mskit::theorems::OracleClass;
    assert_eq!(oracle_exit_code(OracleClass::Nonzero, true), 3);
    assert_eq!(oracle_exit_code(OracleClass::Zero, false), 3);
    assert_eq!(oracle_exit_code(OracleClass::Zero, true), 0);
    assert_eq!(oracle_exit_code(OracleClass::Nonzero, false), 0);
    assert_eq!(oracle_exit_code(OracleClass::Indeterminate, true), 4);
}

#[test]
fn malformed_input_exits_two_without_a_report() {
    let fx = Fixture::new();
    fx.write("bad.json", "{\"min_index\": 0, \"coeffs\": [[1]]}");
    let (code, out) = check_zero(&fx, "zbar.json", "bad.json", &[]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    fx.write("outside.json", r#"{"zeros": [[1.5,0]], "constant": [1,0]}"#);
    let (t, f) = (fx.path("outside.json"), fx.path("zbar.json"));
    let out = mskit(&["check-zero", s(&t), s(&f), s(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(mskit(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn identities_exit_codes() {
    let ok = mskit(&["identities", "--trials", "3", "--truncation", "48"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let wrong = mskit(&["identities", "--trials", "3", "--truncation", "48", "--self-test", "--groups", "algebra"]);
    assert_eq!(wrong.status.code(), Some(1));
    let none = mskit(&["identities", "--trials", "0"]);
    assert_eq!(none.status.code(), Some(2));
    assert!(none.stdout.is_empty());
}

#[test]
fn kernel_probe_csv_has_seventeen_digits() {
    let fx = Fixture::new();
    let sym = fx.path("zbar.json");
    let out = mskit(&["probe", "kernel", "--symbols", s(&sym), "--radii", "0.6", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,angle,adequacy,hankel_kz,hankel_adj_u_kzbar");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let value: f64 = row[3].parse().unwrap();
    assert!((value - 0.8).abs() < 1e-14);
    let mantissa = row[3].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn tto_and_tho_dump_matrices_to_out_path() {
    let fx = Fixture::new();
    let (t, g, out) = (fx.path("theta.json"), fx.path("zbar.json"), fx.path("m.json"));
    let res = mskit(&["tto", s(&t), s(&g), "--truncation", "16", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(0));
    assert!(res.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((v["rows"].as_u64(), v["cols"].as_u64()), (Some(2), Some(2)));
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);

    let w3 = fx.write("w3.json", r#"{"min_index": 3, "coeffs": [[1,0]]}"#);
    let res = mskit(&["tho", s(&t), s(&w3), "--truncation", "16"]);
    assert_eq!(res.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    let entries = v["entries"].as_array().unwrap();
    let nonzero =
        entries.iter().filter(|e| e[0].as_f64().unwrap().abs() + e[1].as_f64().unwrap().abs() > 1e-12).count();
    assert_eq!(nonzero, 2);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = mskit(&["identities", "--trials", "2", "--truncation", "32", "--seed", "7"]);
    let b = mskit(&["identities", "--trials", "2", "--truncation", "32", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}
