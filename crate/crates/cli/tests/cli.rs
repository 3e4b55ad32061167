use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zonoverify"))
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn relu_1d() -> Value {
    json!({"layers": [{"weights": [["1"]], "biases": ["0"]}], "output": {"weights": ["1"], "bias": "0"}})
}

#[test]
fn square_containment() {
    let dir = TempDir::new().unwrap();
    let unit = write(dir.path(), "unit.json", &json!({"generators": [["1", "0"], ["0", "1"]]}));
    let doubled = write(dir.path(), "doubled.json", &json!({"generators": [["2", "0"], ["0", "2"]]}));
    let v = ok_json(&["zono-contain", "--inner", s(&unit), "--outer", s(&doubled)]);
    assert_eq!(v["contained"], json!(true));
    let v = ok_json(&["zono-contain", "--inner", s(&doubled), "--outer", s(&unit)]);
    assert_eq!(v["contained"], json!(false));
    assert!(v["witness"].is_array() && v["separator"]["direction"].is_array());
}

#[test]
fn clique_pipeline() {
    let dir = TempDir::new().unwrap();
    let tri = write(dir.path(), "tri.json", &json!({"colors": [[0], [1], [2]], "edges": [[0, 1], [0, 2], [1, 2]]}));
    let inst = run(&["gen-clique-instance", "--graph", s(&tri), "--kind", "positivity"]);
    assert!(inst.status.success());
    let inst_path = dir.path().join("inst.json");
    std::fs::write(&inst_path, &inst.stdout).unwrap();
    let v = ok_json(&["verify-positivity", "--network", s(&inst_path)]);
    assert_eq!(v["holds"], json!(true));
    assert_eq!(v["witness"].as_array().unwrap().len(), 4);

    let path = write(dir.path(), "path.json", &json!({"colors": [[0], [1], [2]], "edges": [[0, 1], [1, 2]]}));
    let out = dir.path().join("inst2.json");
    let gen = run(&["gen-clique-instance", "--graph", s(&path), "--output", s(&out)]);
    assert!(gen.status.success() && gen.stdout.is_empty());
    let v = ok_json(&["verify-positivity", "--network", s(&out)]);
    assert_eq!(v["holds"], json!(false));
}

#[test]
fn solve_clique_methods_agree() {
    let dir = TempDir::new().unwrap();
    let g = write(
        dir.path(),
        "g.json",
        &json!({"colors": [[0, 1], [2], [3, 4]], "edges": [[0, 2], [1, 2], [2, 4], [1, 4], [0, 3]]}),
    );
    for method in ["brute-force", "reduction"] {
        let v = ok_json(&["solve-clique", "--graph", s(&g), "--method", method]);
        assert_eq!(v["clique"], json!([1, 2, 4]), "{method}");
    }
    let none = write(dir.path(), "n.json", &json!({"colors": [[0], [1], [2]], "edges": [[0, 1], [1, 2]]}));
    for method in ["brute-force", "reduction"] {
        assert_eq!(ok_json(&["solve-clique", "--graph", s(&none), "--method", method])["clique"], Value::Null);
    }
}

#[test]
fn io_counterexample() {
    let dir = TempDir::new().unwrap();
    let net = write(dir.path(), "relu.json", &relu_1d());
    let dom = write(dir.path(), "p.json", &json!({"A": [["1"], ["-1"]], "b": ["1", "1"]}));
    let v = ok_json(&["verify-io", "--network", s(&net), "--domain", s(&dom), "--lo", "0", "--hi", "1/2"]);
    assert_eq!(v["holds"], json!(false));
    assert_eq!(v["counterexample"], json!(["1"]));
    let v = ok_json(&["verify-io", "--network", s(&net), "--domain", s(&dom), "--lo", "-1", "--hi", "1"]);
    assert_eq!(v["holds"], json!(true));
    let v = ok_json(&["max", "--network", s(&net), "--domain", s(&dom)]);
    assert_eq!(v["status"], json!("attained"));
    assert_eq!(v["value"], json!("1"));
}

#[test]
fn lipschitz_commands() {
    let dir = TempDir::new().unwrap();
    let net = write(
        dir.path(),
        "n.json",
        &json!({"layers": [{"weights": [["1", "2"], ["-3", "1"]], "biases": ["0", "0"]}],
                "output": {"weights": ["1", "1"], "bias": "0"}}),
    );
    let exact = ok_json(&["lipschitz", "--network", s(&net), "--p", "inf"]);
    let icnn = ok_json(&["icnn-lipschitz", "--network", s(&net), "--p", "inf"]);
    assert_eq!(exact["value"], json!("5"));
    assert_eq!(icnn["value"], json!("5"));
    assert_eq!(icnn["lp_count"], json!(4));
    let l2 = ok_json(&["lipschitz", "--network", s(&net), "--p", "2"]);
    assert_eq!(l2["value"], json!("sqrt(13)"));
}

#[test]
fn zonotope_norms_and_seeds() {
    let dir = TempDir::new().unwrap();
    let gens: Vec<Value> = (0..30).map(|i| json!([format!("{}", i % 7 - 3), format!("{}/3", i % 5 + 1)])).collect();
    let z = write(dir.path(), "z.json", &json!({"generators": gens}));
    let exact = ok_json(&["zono-lpmax", "--zonotope", s(&z), "--p", "1"]);
    let approx = ok_json(&["zono-approx-max", "--zonotope", s(&z), "--p", "1", "--epsilon", "1/2", "--seed", "3"]);
    assert_eq!(approx["seed"], json!(3));
    // the default sample already covers 30 generators in the plane
    assert_eq!(approx["alpha"], exact["value"]);
    let red = ok_json(&["zono-reduce", "--zonotope", s(&z), "--epsilon", "1/2", "--sampling-constant", "1"]);
    assert!(red["seed"].is_u64(), "a fresh seed is reported");
    assert!(red["zonotope"]["generators"].as_array().unwrap().len() < 30);
    let again = ok_json(&[
        "zono-reduce", "--zonotope", s(&z), "--epsilon", "1/2", "--sampling-constant", "1", "--seed",
        &red["seed"].to_string(),
    ]);
    assert_eq!(again["zonotope"], red["zonotope"]);
}

#[test]
fn schema_errors_exit_2_with_pointer() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        &json!({"layers": [{"weights": [["1", "x"]], "biases": ["0"]}], "output": {"weights": ["1"], "bias": "0"}}),
    );
    let out = run(&["verify-zero", "--network", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/layers/0/weights/0/1"), "{err}");

    let shape = write(
        dir.path(),
        "shape.json",
        &json!({"layers": [{"weights": [["1"]], "biases": ["0", "0"]}], "output": {"weights": ["1"], "bias": "0"}}),
    );
    assert_eq!(run(&["verify-zero", "--network", s(&shape)]).status.code(), Some(2));
    let not_json = dir.path().join("nope.json");
    std::fs::write(&not_json, "{").unwrap();
    assert_eq!(run(&["verify-zero", "--network", s(&not_json)]).status.code(), Some(2));
}

#[test]
fn resource_guards_exit_3() {
    let dir = TempDir::new().unwrap();
    let colors: Vec<Vec<usize>> = (0..8).map(|c| (c * 10..c * 10 + 10).collect()).collect();
    let g = write(dir.path(), "big.json", &json!({"colors": colors, "edges": []}));
    assert_eq!(run(&["solve-clique", "--graph", s(&g)]).status.code(), Some(3));
    let wide: Vec<String> = (0..21).map(|_| "1".to_string()).collect();
    let net = write(
        dir.path(),
        "wide.json",
        &json!({"layers": [{"weights": [wide], "biases": ["0"]}], "output": {"weights": ["1"], "bias": "0"}}),
    );
    assert_eq!(run(&["icnn-lipschitz", "--network", s(&net), "--p", "inf"]).status.code(), Some(3));
}

#[test]
fn verdicts_are_not_exit_codes() {
    let dir = TempDir::new().unwrap();
    let neg = write(
        dir.path(),
        "neg.json",
        &json!({"layers": [{"weights": [["1"]], "biases": ["0"]}], "output": {"weights": ["-1"], "bias": "0"}}),
    );
    let out = run(&["verify-positivity", "--network", s(&neg)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["holds"], json!(false));
}

#[test]
fn bench_jsonl() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("bench.jsonl");
    for kind in ["cells", "vertices"] {
        let out = run(&[
            "bench", "--kind", kind, "--d-min", "2", "--d-max", "2", "--n-min", "2", "--n-max", "8", "--seed", "1",
            "--append", s(&log),
        ]);
        assert!(out.status.success());
        let lines: Vec<Value> =
            String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 7);
        for (r, n) in lines.iter().zip(2..) {
            let expected = if kind == "cells" { 1 + n + n * (n - 1) / 2 } else { 2 * n };
            assert_eq!(r["count"], json!(expected));
        }
    }
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 14);
    let empty = run(&["bench", "--kind", "cells", "--n-min", "5", "--n-max", "4", "--seed", "1"]);
    assert!(empty.status.success() && empty.stdout.is_empty());
}
