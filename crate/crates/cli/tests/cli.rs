use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn pstep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pstep"))
        .args(args)
        .env_remove("PSTEP_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn schema_valid(name: &str, doc: &Value) -> bool {
    let path = format!(
        "{}/../core/schemas/{name}.schema.json",
        env!("CARGO_MANIFEST_DIR")
    );
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap().is_valid(doc)
}

const RUN: &str = r#"{
  "schema_version": 1,
  "model": {"name": "logit", "theta_box": {"lower": [-10, 0.1], "upper": [10, 10]},
            "x_box": {"lower": [-4], "upper": [4]}},
  "theta_true": [0, 1],
  "initial_points": [-4, 0, 4],
  "initial_weights": [WEIGHTS],
  "estimator": "mle",
  "error": {"kind": "exponential_family"},
  "steps": 1,
  "fit": {"starts": 0}
}"#;

fn run_json(weights: &str) -> String {
    RUN.replace("WEIGHTS", weights)
}

fn sim_json(extra: &str, run: &str) -> String {
    let mut run: Value = serde_json::from_str(run).unwrap();
    run.as_object_mut().unwrap().remove("schema_version");
    let mut v: Value =
        serde_json::from_str(&format!(r#"{{"schema_version": 1, "paths": 1 {extra}}}"#)).unwrap();
    v["run"] = run;
    v.to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const THIRDS: &str = "0.3333333333333333, 0.3333333333333333, 0.3333333333333333";

#[test]
fn design_prints_the_symmetric_logit_support() {
    let o = pstep(&[
        "design", "--model", "logit", "--theta", "0,1", "--xbox", "-4,4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("-1.543405, 1.543405"), "{out}");
    assert!(out.contains("0.500000, 0.500000"));
}

#[test]
fn design_json_and_kw() {
    let o = pstep(&[
        "design", "--model", "logit", "--theta", "4,1", "--xbox", "-4,4", "--format", "json",
    ]);
    assert!(o.status.success());
    let card: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(schema_valid("reference_card", &card));
    let x0 = card["design"]["points"][1][0].as_f64().unwrap();
    assert!((x0 + 1.601).abs() < 1e-3, "{x0}");

    let o = pstep(&[
        "design",
        "--model",
        "poisson2",
        "--theta",
        "0,-1,-1",
        "--xbox",
        "0,0.5,0,0.5",
        "--verify-kw",
        "--grid-n",
        "21",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("SD*           false") && out.contains("argmax        0.500000, 0.500000"),
        "{out}"
    );
}

#[test]
fn bad_arguments_exit_1() {
    for args in [
        &["design", "--model", "nope", "--theta", "1", "--xbox", "0,1"][..],
        &[
            "design", "--model", "logit", "--theta", "0,x", "--xbox", "-4,4",
        ],
        &[
            "design", "--model", "logit", "--theta", "0,1", "--xbox", "4,-4",
        ],
        &["frobnicate"],
    ] {
        let o = pstep(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(pstep(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.json",
        &sim_json("", &run_json("0.5, 0.3, 0.3")),
    );
    let o = pstep(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run.initial_weights"), "{}", stderr(&o));

    let cfg = write(
        dir.path(),
        "run.json",
        &run_json(THIRDS).replace("\"schema_version\": 1,", ""),
    );
    let o = pstep(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema_version"));
}

#[test]
fn run_emits_a_path_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", &run_json(THIRDS));
    let o = pstep(&["run", "--config", &cfg, "--steps", "4", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(schema_valid("path_record", &rec));
    assert_eq!(rec["points"].as_array().unwrap().len(), 3 + 4 * 2);
    assert_eq!(rec["config"]["seed"], 3);
}

#[test]
fn simulate_smoke_is_schema_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", &sim_json("", &run_json(THIRDS)));
    let out = dir.path().join("out");
    let o = pstep(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
        "--format",
        "csv",
        "--format",
        "svg",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(schema_valid("sim_summary", &s));
    assert_eq!(s["paths"], 1);
    let csv = std::fs::read_to_string(out.join("tables.csv")).unwrap();
    assert!(csv.starts_with("k,n,stat_name,component,value\n1,3,efficiency,min,"));
    assert!(std::fs::read_to_string(out.join("figure.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn simulate_abort_threshold_exits_2() {
    // one initial point cannot identify two parameters, so every Wynn path aborts
    let dir = tempfile::tempdir().unwrap();
    let run = run_json(THIRDS)
        .replace(
            "\"initial_points\": [-4, 0, 4],",
            "\"initial_points\": [0],",
        )
        .replace(&format!("\"initial_weights\": [{THIRDS}],"), "");
    let cfg = write(
        dir.path(),
        "sim.json",
        &sim_json(r#", "algorithm": "wynn", "paths": 3"#, &run).replace("\"paths\": 1 ,", ""),
    );
    let o = pstep(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("3 of 3 paths aborted"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn compare_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.json",
        &sim_json(r#", "paths": 3"#, &run_json(THIRDS)).replace("\"paths\": 1 ,", ""),
    );
    let out = dir.path().join("a");
    let o = pstep(&[
        "simulate",
        "--config",
        &cfg,
        "--steps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = out.join("summary.json");
    let s = summary.to_str().unwrap();
    let o = pstep(&["compare", "--a", s, "--b", s]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(schema_valid("comparison_report", &r));
    for row in r["rows"].as_array().unwrap() {
        assert_eq!(row["median_delta"], 0.0);
    }
    // a config and a summary with different sample sizes do not line up
    let o = pstep(&["compare", "--a", s, "--b", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("checkpoints differ"), "{}", stderr(&o));
}
