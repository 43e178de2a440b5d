use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cubic-tba"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn error_of(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has an error line");
    let v: Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["schema_version"], 1);
    v["error"].clone()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn periods_of_the_pentagon() {
    let v = ok_json(&["periods", "--example", "pentagon", "--charge", "1,1"]);
    assert_eq!(v["schema_version"], 1);
    let z1 = &v["periods"][0]["Z"];
    assert!((z1[0].as_f64().unwrap() + 2.00324).abs() < 5e-5);
    assert!((z1[1].as_f64().unwrap() - 1.15657).abs() < 5e-5);
    assert_eq!(v["periods"].as_array().unwrap().len(), 3);
    assert_eq!(v["periods"][2]["charge"], serde_json::json!([1, 1]));
}

#[test]
fn curve_definition_round_trips() {
    let dir = TempDir::new().unwrap();
    let def = path(&dir, "hex.json");
    let a = ok_json(&["periods", "--example", "hexagon", "--definition-out", &def]);
    let b = ok_json(&["periods", "--curve", &def]);
    assert_eq!(a["periods"], b["periods"]);
    assert_eq!(read_json(Path::new(&def))["schema_version"], 1);
}

#[test]
fn spectrum_dump_and_validate() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "hex.json");
    assert!(run(&["bps", "dump", "--example", "hexagon", "--out", &file]).status.success());
    let v = ok_json(&["bps", "validate", "--spectrum", &file]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["entries"], 24);

    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, r#"{"schema_version":1,"entries":[{"charge":[1,0],"omega":1}]}"#).unwrap();
    let out = run(&["bps", "validate", "--spectrum", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["kind"], "ValidationFailed");
}

#[test]
fn tba_solve_is_deterministic_and_reloadable() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    for out in [&a, &b] {
        let r = run(&["tba", "solve", "--example", "pentagon", "--R", "0.5", "--theta", "0", "--out", out]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = read_json(Path::new(&a));
    let x1 = v["coordinates"][0]["X"].as_f64().unwrap();
    assert!((x1 - 0.1286).abs() < 1e-3);
    assert!(v["coordinates"][0]["log_X"][1].as_f64().unwrap().abs() < 1e-9);
    assert!(v["final_delta"].as_f64().unwrap() < 1e-10);

    let e = ok_json(&["tba", "eval", "--solution", &a, "--charge", "1,0", "--charge", "-1,0"]);
    let x = e["coordinates"][0]["X"].as_f64().unwrap();
    let y = e["coordinates"][1]["X"].as_f64().unwrap();
    assert_eq!(x, x1);
    assert!((x * y - 1.0).abs() < 1e-12);
}

#[test]
fn spectrum_file_feeds_the_solver() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "p.json");
    assert!(run(&["bps", "dump", "--example", "pentagon", "--out", &file]).status.success());
    let a = ok_json(&["tba", "solve", "--example", "pentagon", "--R", "1"]);
    let b = ok_json(&["tba", "solve", "--example", "pentagon", "--R", "1", "--spectrum", &file]);
    assert_eq!(a["coordinates"], b["coordinates"]);
}

#[test]
fn numerical_failures_exit_with_two() {
    let out = run(&["tba", "solve", "--example", "pentagon", "--R", "0.5", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "NoConvergence");
}

#[test]
fn bad_input_exits_with_one() {
    let out = run(&["tba", "solve", "--example", "pentagon", "--R", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["kind"], "InvalidInput");

    let out = run(&["tba", "solve", "--example", "pentagon", "--curve", "x.json", "--R", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["periods", "--example", "octagon"]);
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["periods", "--example", "pentagon"])
        .env("CUBIC_TBA_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_results() {
    let one = bin()
        .args(["tba", "solve", "--example", "hexagon", "--R", "1", "--theta", "0.2"])
        .env("CUBIC_TBA_THREADS", "1")
        .output()
        .unwrap();
    let two = bin()
        .args(["tba", "solve", "--example", "hexagon", "--R", "1", "--theta", "0.2"])
        .env("CUBIC_TBA_THREADS", "2")
        .output()
        .unwrap();
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn asymptotic_prediction_and_check() {
    let v = ok_json(&["asym", "predict", "--example", "hexagon", "--charge", "0,0,1,0", "--theta", "0.2"]);
    assert_eq!(v["exact"], true);
    assert!((v["prediction"]["a"].as_f64().unwrap() + 7.4748).abs() < 5e-4);

    let out = run(&["asym", "check", "--example", "pentagon", "--charge", "1,0", "--R-grid", "1,2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["R", "logX", "prediction", "delta", "scaled"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let delta: f64 = rows[1][3].parse().unwrap();
    assert!(delta.abs() < 1e-4);
}

#[test]
fn polygon_evaluation() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "v.json");
    let verts: Vec<[f64; 3]> = (0..5)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            [t.cos(), t.sin(), 1.0]
        })
        .collect();
    std::fs::write(&file, serde_json::to_string(&verts).unwrap()).unwrap();
    let v = ok_json(&["polygon", "eval", "--expr", "pentagon:gamma1", "--vertices", &file]);
    assert!((v["value"].as_f64().unwrap() - 0.618034).abs() < 1e-6);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 0);

    let out = run(&["polygon", "eval", "--expr", "p(1,2,3) p(1,2,4)^-1", "--vertices", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["kind"], "UnbalancedExpression");
}

#[test]
fn network_trace_and_sweep() {
    let dir = TempDir::new().unwrap();
    let lines = path(&dir, "net.txt");
    let v = ok_json(&["network", "trace", "--example", "pentagon", "--theta", "0", "--polylines", &lines]);
    assert_eq!(v["trajectories"], 18);
    assert_eq!(v["final_arcs"].as_array().unwrap().len(), 5);
    let text = std::fs::read_to_string(&lines).unwrap();
    assert_eq!(text.split("\n\n").filter(|s| !s.trim().is_empty()).count(), 18);

    let frames = dir.path().join("frames");
    let out = run(&["network", "sweep", "--example", "pentagon", "--frames", "3", "--out-dir", frames.to_str().unwrap()]);
    assert!(out.status.success());
    let index = read_json(&frames.join("index.json"));
    assert_eq!(index["frames"].as_array().unwrap().len(), 3);
    for k in 0..3 {
        assert!(frames.join(format!("frame_{k:04}.txt")).exists());
    }
    let theta1 = index["frames"][1]["theta"].as_f64().unwrap();
    assert!((theta1 - std::f64::consts::PI / 300.0).abs() < 1e-15);
}

#[test]
fn bps_scan_harvests_a_spectrum_the_solver_accepts() {
    let dir = TempDir::new().unwrap();
    let spec = path(&dir, "harvest.json");
    let v = ok_json(&["network", "bps", "--example", "pentagon", "--spectrum-out", &spec]);
    assert_eq!(v["webs"].as_array().unwrap().len(), 6);
    assert_eq!(v["spectrum"].as_array().unwrap().len(), 6);
    let valid = ok_json(&["bps", "validate", "--spectrum", &spec]);
    assert_eq!(valid["valid"], true);
    let a = ok_json(&["tba", "solve", "--example", "pentagon", "--R", "0.5", "--spectrum", &spec]);
    let b = ok_json(&["tba", "solve", "--example", "pentagon", "--R", "0.5"]);
    assert_eq!(a["coordinates"], b["coordinates"]);
}

#[test]
fn reproduce_pentagon_reports_every_check() {
    let v = ok_json(&["reproduce", "pentagon"]);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    let find = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap();
    assert_eq!(find("X_gamma1 at R=0.5")["pass"], true);
    assert_eq!(find("BPS phases")["pass"], true);
    assert_eq!(
        v["passed"].as_u64().unwrap() + v["failed"].as_u64().unwrap(),
        checks.len() as u64
    );
}
