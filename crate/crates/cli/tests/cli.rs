use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

use pqsys::json::{data_to_string, matrix_from_str, system_from_str, system_to_string};
use pqsys::opcore::{c, op_norm, real_matrix, ComplexMatrix, Tolerances};
use pqsys::realize::{chebyshev_data, chebyshev_system, chebyshev_theta, jacobi_realize};
use pqsys::sampling::{pqs_system, rng, unitary};
use pqsys::transfer::theta_eval;
use pqsys::{Atom, PartitionedContraction, SqsFunctionData};

struct Run {
    code: i32,
    report: Value,
    stderr: String,
}

fn pqsys(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_pqsys")).args(args).arg("--json").output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        report: serde_json::from_str(&stdout).unwrap_or(Value::Null),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn write_system(dir: &TempDir, name: &str, sys: &PartitionedContraction) -> PathBuf {
    write(dir, name, &system_to_string(sys))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name} in {report}"))
}

fn passes(report: &Value, name: &str) -> bool {
    check(report, name)["pass"].as_bool().unwrap()
}

fn scalar(value: f64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, c(value, 0.0))
}

fn atoms(theta0: f64, points: &[(f64, f64)]) -> SqsFunctionData {
    SqsFunctionData {
        theta0: scalar(theta0),
        atoms: points.iter().map(|&(t, w)| Atom { t, sigma: scalar(w) }).collect(),
    }
}

fn swap_system() -> PartitionedContraction {
    PartitionedContraction::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]), 1, 1, 1).unwrap()
}

#[test]
fn classify_conservative_example() {
    let dir = TempDir::new().unwrap();
    let path = write_system(&dir, "swap.json", &swap_system());
    let run = pqsys(&["classify", s(&path)]);
    assert_eq!(run.code, 0);
    for flag in ["passive", "isometric", "coisometric", "conservative", "pqs"] {
        assert_eq!(run.report["details"]["class"][flag], true, "{flag}");
    }
    assert_eq!(run.report["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn classify_chebyshev() {
    let dir = TempDir::new().unwrap();
    let path = write_system(&dir, "cheb.json", &chebyshev_system(c(0.2, 0.0), 16).unwrap());
    let run = pqsys(&["classify", s(&path)]);
    assert_eq!(run.code, 0);
    assert!(passes(&run.report, "pqs"));
    assert!(passes(&run.report, "minimal"));
    assert!(passes(&run.report, "strongly_stable") && passes(&run.report, "strongly_costable"));
}

#[test]
fn malformed_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "bad.json", "{\"in_dim\": 1,");
    let run = pqsys(&["classify", s(&path)]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("malformed JSON"), "{}", run.stderr);

    let wrong = write(&dir, "wrong.json", "{\"rows\": 1}");
    assert_eq!(pqsys(&["classify", s(&wrong)]).code, 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(pqsys(&["classify", s(&missing)]).code, 2);
    let good = write_system(&dir, "swap.json", &swap_system());
    assert_eq!(pqsys(&["classify", s(&good), "--tol", "bogus=1"]).code, 2);
    assert_eq!(pqsys(&["eval", s(&good), "--grid", "ring:3"]).code, 2);
}

#[test]
fn eval_at_zero_returns_d() {
    let dir = TempDir::new().unwrap();
    let sys = pqs_system(&mut rng(3), 2, 3, &Tolerances::default()).unwrap();
    let path = write_system(&dir, "sys.json", &sys);
    let out = dir.path().join("samples.json");
    let run = pqsys(&["eval", s(&path), "--lambda", "0,0", "--out", s(&out)]);
    assert_eq!(run.code, 0);
    let samples: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let value = matrix_from_str(&samples["samples"][0]["value"].to_string()).unwrap();
    assert!(op_norm(&(value - sys.d())) < 1e-15);
}

#[test]
fn eval_matches_chebyshev_closed_form() {
    let dir = TempDir::new().unwrap();
    let d = c(0.2, 0.0);
    let path = write_system(&dir, "cheb.json", &chebyshev_system(d, 200).unwrap());
    let run = pqsys(&["eval", s(&path), "--lambda", "0.6", "--lambda", "-0.3,0.4", "--lambda", "0,0.5"]);
    assert_eq!(run.code, 0);
    for sample in run.report["result"]["samples"].as_array().unwrap() {
        let p = &sample["point"];
        let z = c(p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        let v = &sample["value"]["data"][0];
        let got = c(v[0].as_f64().unwrap(), v[1].as_f64().unwrap());
        assert!((got - chebyshev_theta(d, z)).norm() < 1e-9, "{z}");
    }
}

#[test]
fn eval_on_circle_stays_in_schur_class() {
    let dir = TempDir::new().unwrap();
    let sys = pqs_system(&mut rng(4), 2, 3, &Tolerances::default()).unwrap();
    let path = write_system(&dir, "sys.json", &sys);
    let run = pqsys(&["eval", s(&path), "--grid", "circle:64"]);
    assert_eq!(run.code, 0);
    assert!(passes(&run.report, "schur_bound"));
    assert!(run.report["details"]["max_norm"].as_f64().unwrap() <= 1.0 + 1e-7);
    let run = pqsys(&["eval", s(&path), "--function", "char", "--grid", "disk:9"]);
    assert_eq!(run.code, 0);
}

#[test]
fn q_checks_are_seeded() {
    let dir = TempDir::new().unwrap();
    let sys = pqs_system(&mut rng(5), 1, 3, &Tolerances::default()).unwrap();
    let path = write_system(&dir, "sys.json", &sys);
    let args = ["eval", s(&path), "--function", "q", "--grid", "circle:5:2", "--seed", "7"];
    let first = pqsys(&args);
    assert_eq!(first.code, 0);
    assert!(passes(&first.report, "q_theta_relation"));
    assert!(passes(&first.report, "kernel_normalization"));
    assert_eq!(first.report["seed"], 7);
    assert_eq!(first.report, pqsys(&args).report);
}

#[test]
fn realize_single_atom() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "m.json", &data_to_string(&atoms(0.0, &[(0.0, 1.0)])));
    let run = pqsys(&["realize", s(&path)]);
    assert_eq!(run.code, 0);
    let sys = system_from_str(&run.report["result"].to_string()).unwrap();
    assert_eq!(sys.state_dim(), 1);
    let swap = swap_system();
    let moduli = |m: &ComplexMatrix| m.map(|z| c(z.norm(), 0.0));
    assert!(op_norm(&(moduli(sys.t()) - moduli(swap.t()))) < 1e-12);
}

#[test]
fn realize_chebyshev_membership() {
    let dir = TempDir::new().unwrap();
    let inside = write(&dir, "in.json", &data_to_string(&chebyshev_data(c(0.5, 0.0), 40)));
    let outside = write(&dir, "out.json", &data_to_string(&chebyshev_data(c(0.51, 0.0), 40)));
    assert_eq!(pqsys(&["realize", s(&inside)]).code, 0);
    let run = pqsys(&["realize", s(&outside)]);
    assert_eq!(run.code, 1);
    assert!(!passes(&run.report, "membership"));
    assert!(run.report.get("result").is_none());
}

#[test]
fn realize_then_classify_round_trip() {
    let dir = TempDir::new().unwrap();
    let data = atoms(0.1, &[(-0.6, 0.2), (0.1, 0.25), (0.7, 0.15)]);
    let path = write(&dir, "m.json", &data_to_string(&data));
    let out = dir.path().join("sys.json");
    let run = pqsys(&["realize", s(&path), "--out", s(&out)]);
    assert_eq!(run.code, 0);
    assert!(passes(&run.report, "data_agreement"));
    let run = pqsys(&["classify", s(&out)]);
    assert!(passes(&run.report, "pqs") && passes(&run.report, "minimal"));
}

#[test]
fn jacobi_cases() {
    let dir = TempDir::new().unwrap();
    // One atom of the largest admissible weight, Θ(0) at the ball center.
    let one = write(&dir, "one.json", &data_to_string(&atoms(-0.3, &[(0.3, 0.91)])));
    let run = pqsys(&["jacobi", s(&one)]);
    assert_eq!(run.code, 0, "{}", run.report);
    let a = run.report["result"]["a"][0].as_f64().unwrap();
    let b = run.report["result"]["b"][0].as_f64().unwrap();
    assert!((a - 0.91).abs() < 1e-12 && (b - 0.3).abs() < 1e-12);

    let three = write(&dir, "three.json", &data_to_string(&atoms(0.0, &[(-0.5, 0.2), (0.0, 0.3), (0.4, 0.1)])));
    let run = pqsys(&["jacobi", s(&three)]);
    assert_eq!(run.code, 0);
    assert_eq!(run.report["details"]["length"], 3);
    assert_eq!(run.report["details"]["truncated"], false);

    let cheb = write_system(&dir, "cheb.json", &chebyshev_system(c(0.0, 0.0), 100).unwrap());
    let out = dir.path().join("jacobi.json");
    let run = pqsys(&["jacobi", s(&cheb), "--max-len", "30", "--out", s(&out)]);
    assert_eq!(run.code, 0);
    let j = pqsys::json::jacobi_from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(j.truncated);
    assert!(j.a.iter().all(|a| (a - 0.5).abs() < 1e-6));
}

#[test]
fn dilate_cases() {
    let dir = TempDir::new().unwrap();
    let run = pqsys(&["dilate", s(&write_system(&dir, "swap.json", &swap_system()))]);
    assert_eq!(run.code, 0);
    assert_eq!(run.report["details"]["dk_dim"], 0);
    assert_eq!(run.report["details"]["dk_adj_dim"], 0);

    let path = write_system(&dir, "cheb.json", &chebyshev_system(c(0.1, 0.0), 8).unwrap());
    let run = pqsys(&["dilate", s(&path)]);
    assert_eq!(run.code, 0);
    assert!(passes(&run.report, "circle_unitarity"));
    let bold = system_from_str(&run.report["result"]["system"].to_string()).unwrap();
    assert!(bold.classify(&Tolerances::default()).conservative);
}

#[test]
fn similar_cases() {
    let tol = Tolerances::default();
    let dir = TempDir::new().unwrap();
    let mut r = rng(9);
    let s1 = pqs_system(&mut r, 2, 3, &tol).unwrap();
    let v = unitary(&mut r, 3);
    let p1 = write_system(&dir, "s1.json", &s1);
    let p2 = write_system(&dir, "s2.json", &s1.conjugate(&v).unwrap());
    let run = pqsys(&["similar", s(&p1), s(&p2)]);
    assert_eq!(run.code, 0);
    let u = matrix_from_str(&run.report["result"].to_string()).unwrap();
    assert!(op_norm(&(u - &v)) < 1e-8);

    let run = pqsys(&["similar", s(&p1), s(&p1)]);
    let u = matrix_from_str(&run.report["result"].to_string()).unwrap();
    assert!(op_norm(&(u - pqsys::opcore::identity(3))) < 1e-10);

    let diag = chebyshev_system(c(0.1, 0.0), 8).unwrap();
    let jac = jacobi_realize(&diag, 20, &tol).unwrap().jacobi.to_system().unwrap();
    let pd = write_system(&dir, "diag.json", &diag);
    let pj = write_system(&dir, "jac.json", &jac);
    assert_eq!(pqsys(&["similar", s(&pd), s(&pj)]).code, 0);

    let other = write_system(&dir, "other.json", &chebyshev_system(c(0.2, 0.0), 8).unwrap());
    let run = pqsys(&["similar", s(&pd), s(&other)]);
    assert_eq!(run.code, 1);
    assert!(!passes(&run.report, "transfer_agreement"));
    assert!(run.report.get("result").is_none());
    // The transfer functions really differ.
    let z = c(0.3, 0.0);
    let gap = theta_eval(&diag, z, &tol).unwrap() - theta_eval(&system_from_str(&std::fs::read_to_string(&other).unwrap()).unwrap(), z, &tol).unwrap();
    assert!(op_norm(&gap) > 1e-3);
}

#[test]
fn human_report_and_report_file() {
    let dir = TempDir::new().unwrap();
    let path = write_system(&dir, "swap.json", &swap_system());
    let report_path = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_pqsys"))
        .args(["classify", s(&path), "--report", s(&report_path)])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command: classify"));
    assert!(text.contains("0.000e0"));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(saved["command"], "classify");
}
