use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_witt-tower"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tame_check_reports_the_ratio_branch() {
    let out = run(&["tame-check", "2,0,0,1", "1,1,0,1", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["branch"], "EigenvalueRatio(2,1)");

    let out = run(&["tame-check", "5^1:1:[[[1],[0]],[[0],[4]]]", "1,0,0,1", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["branch"], "SemisimpleFiniteOrder");
}

#[test]
fn density_query_reports_a_reduced_fraction() {
    let q = data("det_minus_one.json");
    let out = run(&["density", path(&q)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"fraction\": \"1/4\""));
    let r = report(&out);
    assert_eq!(r["result"]["mode"], "exact");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(r["tool"], "witt-tower");

    let a = report(&run(&["density", path(&q), "--sample", "2000", "--seed", "9"]));
    let b = report(&run(&["density", path(&q), "--sample", "2000", "--seed", "9", "--sequential"]));
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["seed"], 9);
}

#[test]
fn input_errors_exit_four() {
    assert_eq!(run(&["density", "/nonexistent.json"]).status.code(), Some(4));
    assert_eq!(run(&["tame-check", "2,0,0", "1,1,0,1", "2"]).status.code(), Some(4));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let bumped = dir.path().join("q.json");
    let s = std::fs::read_to_string(data("det_minus_one.json")).unwrap();
    std::fs::write(&bumped, s.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap();
    assert_eq!(run(&["density", path(&bumped)]).status.code(), Some(4));
    let high = dir.path().join("high.json");
    std::fs::write(&high, s.replace("\"alpha\": 0", "\"alpha\": 3")).unwrap();
    let out = run(&["density", path(&high)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the precision"));
}

#[test]
fn tower_build_output_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let tower = dir.path().join("tower.json");
    assert!(run(&["tower", "sample-plan", "--max-level", "3", "--out", path(&plan)]).status.success());
    assert!(run(&["tower", "build", path(&plan), "--out", path(&tower)]).status.success());
    let out = run(&["tower", "verify", path(&tower)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["passed"], true);

    let out = run(&["field-of-def", path(&tower), "--dmax", "3"]);
    assert_eq!(report(&out)["result"]["field_of_definition"], Value::Null);
}

#[test]
fn corrupted_tower_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let tower = dir.path().join("tower.json");
    run(&["tower", "sample-plan", "--max-level", "2", "--out", path(&plan)]);
    run(&["tower", "build", path(&plan), "--out", path(&tower)]);
    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(&tower).unwrap()).unwrap();
    let t = &mut file["levels"][1]["traces"][0]["trace"];
    let old = t.as_str().unwrap().to_string();
    let new = if old.ends_with("[0,0]") {
        old.replace("[0,0]", "[1,0]")
    } else {
        format!("{}[0,0]", old.split('[').next().unwrap())
    };
    *t = Value::String(new);
    std::fs::write(&tower, serde_json::to_string(&file).unwrap()).unwrap();
    let out = run(&["tower", "verify", path(&tower)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("logged trace"));
}

#[test]
fn nice_scan_exit_codes() {
    let out = run(&[
        "nice-scan",
        path(&data("tame6_group.json")),
        path(&data("tame6_residual.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["first_rho_m_nice"], "v1");
    let out = run(&[
        "nice-scan",
        path(&data("cyclic5_group.json")),
        path(&data("cyclic5_trivial.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn h1_and_integral_model() {
    let out = run(&["h1", path(&data("cyclic5_group.json")), path(&data("trivial_module.json"))]);
    assert_eq!(report(&out)["result"]["h1"], 1);
    let out = run(&["integral-model", path(&data("order2_mats.json"))]);
    let r = report(&out);
    assert_eq!(r["result"]["integral"], true);
    assert_eq!(r["result"]["conjugator"]["den"], 1);
    assert_eq!(run(&["integral-model", path(&data("unbounded_mats.json"))]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = run(&["field-of-def", path(&data("traces.json")), "--dmax", "4", "--out", path(&out_path)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(r["result"]["field_of_definition"], 2);
}
