use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cmk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmk"))
        .args(args)
        .output()
        .expect("cmk runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three collinear points in the plane with `D(x, y) = |x − y| (1, 2)` on
/// the orthant.
const LINE: &str = r#"{
  "labels": ["a", "b", "c"],
  "cone": {"type": "orthant", "dim": 2},
  "norm": {"type": "euclidean"},
  "D": [
    [[0, 0], [1, 2], [3, 6]],
    [[1, 2], [0, 0], [2, 4]],
    [[3, 6], [2, 4], [0, 0]]
  ]
}"#;

#[test]
fn validate_reports_valid_spaces() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "s.json", LINE);
    let out = cmk(&["validate", "--space", s(&space)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "cone-metric-kit/1");
    assert_eq!(v["status"], "valid");
    let out = cmk(&["validate", "--space", s(&space), "--format", "text"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "valid");
}

#[test]
fn validate_flags_axiom_violations() {
    let dir = TempDir::new().unwrap();
    let bad = LINE.replace("[[3, 6], [2, 4], [0, 0]]", "[[30, 60], [2, 4], [0, 0]]");
    let space = write(&dir, "s.json", &bad);
    let out = cmk(&["validate", "--space", s(&space)]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["valid"], false);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_reports_the_location() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "s.json", "{\n  \"labels\": [\"a\",\n  oops\n}");
    let out = cmk(&["validate", "--space", s(&space)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("s.json:3:"), "{err}");
}

#[test]
fn semantic_errors_exit_with_usage_status() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "s.json", &LINE.replace("orthant", "hexagon"));
    let out = cmk(&["validate", "--space", s(&space)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hexagon"));
    let missing = dir.path().join("missing.json");
    assert_eq!(cmk(&["validate", "--space", s(&missing)]).status.code(), Some(2));
}

#[test]
fn bad_flags_exit_with_usage_status() {
    assert_eq!(cmk(&["validate"]).status.code(), Some(2));
    assert_eq!(cmk(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cmk(&["gen"]).status.code(), Some(2), "gen needs a seed");
    assert_eq!(cmk(&["transfer-suite"]).status.code(), Some(2), "transfer-suite needs a seed");
}

#[test]
fn equiv_with_oracle_on_an_orthant_space() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "s.json", LINE);
    let out = cmk(&["equiv", "--space", s(&space), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["sandwich_ok"], true);
    assert_eq!(v["solver"], "closed-form");
    for i in 0..3 {
        for j in 0..3 {
            let d = v["d"][i][j].as_f64().unwrap();
            let n = v["norm_D"][i][j].as_f64().unwrap();
            let o = v["oracle_d"][i][j].as_f64().unwrap();
            assert!((d - n).abs() <= 1e-9);
            assert!((d - o).abs() <= 1e-2);
        }
    }
}

#[test]
fn equiv_on_an_obtuse_cone_is_strictly_below_the_norm() {
    let dir = TempDir::new().unwrap();
    let space = write(
        &dir,
        "s.json",
        r#"{"labels":["a","b"],"cone":{"type":"generators","dim":2,"matrix":[[1,-1],[0,2]]},
            "norm":{"type":"euclidean"},"D":[[[0,0],[-1,2]],[[-1,2],[0,0]]]}"#,
    );
    let v = json(&cmk(&["equiv", "--space", s(&space)]));
    assert!((v["d"][0][1].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((v["norm_D"][0][1].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn gen_output_validates_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = cmk(&["gen", "--seed", "12"]);
    let b = cmk(&["gen", "--seed", "12"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let space = dir.path().join("g.json");
    std::fs::write(&space, &a.stdout).unwrap();
    assert_eq!(cmk(&["validate", "--space", s(&space)]).status.code(), Some(0));

    let cone = write(&dir, "c.json", r#"{"type":"lorentz","dim":3}"#);
    let out = cmk(&["gen", "--seed", "3", "--cone", s(&cone), "--points", "6"]);
    let v = json(&out);
    assert_eq!(v["cone"]["type"], "lorentz");
    assert_eq!(v["labels"].as_array().unwrap().len(), 6);
}

#[test]
fn check_and_minconst_on_a_halving_map() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "s.json", LINE);
    // a ↦ a, b ↦ a, c ↦ b: the worst ratio is D(a, b) / D(b, c) = ½.
    let map = write(&dir, "t.json", r#"{"type":"tabulated","images":["a","a","b"]}"#);
    let out = cmk(&["check", "--kind", "banach", "--alpha", "0.7", "--space", s(&space), "--map", s(&map)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["cone"]["holds"], true);
    assert_eq!(v["metric"]["holds"], true);
    assert_eq!(v["transfer_ok"], true);

    let out = cmk(&["check", "--kind", "banach", "--alpha", "0.4", "--space", s(&space), "--map", s(&map)]);
    let v = json(&out);
    assert_eq!(v["cone"]["holds"], false);
    assert!(!v["cone"]["witnesses"].as_array().unwrap().is_empty());

    let v = json(&cmk(&["minconst", "--kind", "banach", "--space", s(&space), "--map", s(&map)]));
    let metric = v["metric"][0].as_f64().unwrap();
    let cone = v["cone"][0].as_f64().unwrap();
    assert!((metric - 0.5).abs() < 1e-12, "{metric}");
    assert!(cone >= metric && cone - metric <= 2e-6);

    let out = cmk(&["check", "--kind", "hardy-rogers", "--space", s(&space), "--map", s(&map)]);
    assert_eq!(out.status.code(), Some(2), "hardy-rogers needs --coef");
    let out = cmk(&["check", "--kind", "kannan", "--lambda", "0.7", "--space", s(&space), "--map", s(&map)]);
    assert_eq!(out.status.code(), Some(2), "λ must be below ½");
}

#[test]
fn transfer_suite_is_deterministic_and_renders_a_table() {
    let args = ["transfer-suite", "--seeds", "25", "--kinds", "banach,choice-b,power-pair", "--seed", "3"];
    let a = cmk(&args);
    let b = cmk(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let kinds: Vec<_> = v["kinds"].as_array().unwrap().iter().map(|k| k["kind"].as_str().unwrap().to_string()).collect();
    assert_eq!(kinds, ["banach", "choice-b", "power-pair"]);
    for k in v["kinds"].as_array().unwrap() {
        assert_eq!(k["instances"], 25);
        assert_eq!(k["transfer_ok"], 25);
    }
    let mut text_args = args.to_vec();
    text_args.extend(["--format", "text"]);
    let t = String::from_utf8(cmk(&text_args).stdout).unwrap();
    assert!(t.starts_with("kind"));
    assert!(t.contains("choice-b"));
    assert_eq!(cmk(&["transfer-suite", "--seed", "1", "--kinds", "nope"]).status.code(), Some(2));
}

#[test]
fn fixpoint_on_the_affine_demo() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "a.json", r#"{"type":"affine","M":[[0.5,0],[0,0.5]],"b":[0,0]}"#);
    let out = cmk(&["fixpoint", "--map", s(&map), "--x0", "1,1", "--tol", "1e-6", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["iterations"].as_u64().unwrap() <= 21);
    assert_eq!(v["alpha"], 0.5);
    let x = v["fixed_point"].as_array().unwrap();
    assert!(x.iter().all(|c| c.as_f64().unwrap().abs() <= 1e-6));
    assert_eq!(v["trace"]["step_d"].as_array().unwrap().len() as u64, v["iterations"].as_u64().unwrap());

    let out = cmk(&["fixpoint", "--map", s(&map), "--x0", "1,1", "--tol", "1e-6", "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(1), "non-convergence is a failure");
}

#[test]
fn fixpoint_on_a_tabulated_map() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "s.json", LINE);
    let map = write(&dir, "t.json", r#"{"type":"tabulated","images":[0,0,1]}"#);
    let v = json(&cmk(&["fixpoint", "--space", s(&space), "--map", s(&map)]));
    assert_eq!(v["fixed_point"], "a");
    assert_eq!(v["certified"], true);
    assert_eq!(v["all_agree"], true);
    let v = json(&cmk(&["fixpoint", "--space", s(&space), "--map", s(&map), "--x0", "c"]));
    assert_eq!(v["runs"].as_array().unwrap().len(), 1);
    assert_eq!(v["iterations"], 3);

    let id = write(&dir, "id.json", r#"{"type":"tabulated","images":[0,1,2]}"#);
    let out = cmk(&["fixpoint", "--space", s(&space), "--map", s(&id)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["certified"], false);
    assert_eq!(v["fixed_point"], Value::Null);
}

#[test]
fn psi_of_a_diagonal_map() {
    let dir = TempDir::new().unwrap();
    let phi = write(&dir, "phi.json", r#"{"type":"linear","matrix":[[2,0],[0,3]]}"#);
    let cone = write(&dir, "c.json", r#"{"type":"orthant","dim":2}"#);
    let v = json(&cmk(&["psi", "--phi", s(&phi), "--cone", s(&cone)]));
    assert_eq!(v["bound_ok"], true);
    assert_eq!(v["decreasing"], false);
    for (t, p) in v["t"].as_array().unwrap().iter().zip(v["psi"].as_array().unwrap()) {
        assert!((p.as_f64().unwrap() / t.as_f64().unwrap() - 3.0).abs() <= 1e-3);
    }

    let sat = write(&dir, "sat.json", r#"{"type":"scalar","function":"saturating"}"#);
    let line = write(&dir, "r.json", r#"{"type":"orthant","dim":1}"#);
    let v = json(&cmk(&["psi", "--phi", s(&sat), "--cone", s(&line), "--t", "1,3"]));
    assert_eq!(v["psi"][0], 0.5);
    assert_eq!(v["psi"][1], 0.75);
}
