//! End-to-end harness properties: file round trips, worker independence of
//! every written byte, replay of kept paths, and configuration errors.

use pstep::algorithm::{verify_replay, PathRecord};
use pstep::sim::harness::{simulate, summarize_records, write_outputs};
use pstep::sim::{Emit, SimConfig, SimError};
use std::fs;

const SIM: &str = r#"{
  "schema_version": 1,
  "paths": "6",
  "checkpoints": [1, 3, 5],
  "seed": "99",
  "run": {
    "model": {"name": "michaelis_menten",
              "theta_box": {"lower": [0.1, 0.1], "upper": [5, 5]},
              "x_box": {"lower": [0], "upper": [10]}},
    "theta_true": ["2", "3"],
    "initial_points": [1, 10],
    "initial_weights": [0.5, 0.5],
    "estimator": "lse",
    "error": {"kind": "gaussian", "sigma": "0.3"},
    "steps": 5,
    "fit": {"starts": 2}
  }
}"#;

fn files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file() && p.file_name().unwrap() != "timing.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn outputs_are_identical_for_any_worker_count() {
    let mut cfg = SimConfig::from_json(SIM).unwrap();
    let emit = [Emit::Csv, Emit::Json, Emit::Svg];
    let mut all = Vec::new();
    for w in [1, 2, 4] {
        cfg.workers = Some(w);
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&simulate(&cfg).unwrap(), &emit, dir.path()).unwrap();
        all.push(files(dir.path()));
    }
    assert_eq!(all[0].len(), 4);
    assert_eq!(all[0], all[1]);
    assert_eq!(all[0], all[2]);
}

#[test]
fn kept_paths_replay_and_reaggregate() {
    let mut cfg = SimConfig::from_json(SIM).unwrap();
    cfg.keep_paths = true;
    let out = simulate(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&out, &[Emit::Json], dir.path()).unwrap();
    let mut records = Vec::new();
    for e in fs::read_dir(dir.path().join("paths")).unwrap() {
        let rec = PathRecord::from_json(&fs::read_to_string(e.unwrap().path()).unwrap()).unwrap();
        verify_replay(&rec).unwrap();
        records.push(rec);
    }
    assert_eq!(records.len(), 6);
    let again = summarize_records(&cfg, &out.card, &records).unwrap();
    for (a, b) in out.summary.checkpoints.iter().zip(&again.checkpoints) {
        for (ra, rb) in a.n_mse.iter().zip(&b.n_mse) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
        assert_eq!(a.efficiency, b.efficiency);
        assert_eq!(a.mean_det, b.mean_det);
    }
}

#[test]
fn different_seeds_differ() {
    let mut cfg = SimConfig::from_json(SIM).unwrap();
    let a = simulate(&cfg).unwrap().summary;
    cfg.seed += 1;
    let b = simulate(&cfg).unwrap().summary;
    assert_ne!(a.terminal.standardized, b.terminal.standardized);
}

#[test]
fn malformed_weights_name_the_field() {
    let bad = SIM.replace("[0.5, 0.5]", "[0.5, 0.6]");
    match SimConfig::from_json(&bad) {
        Err(e @ SimError::Config { .. }) => {
            assert!(e.is_config());
            assert!(e.to_string().contains("run.initial_weights"), "{e}");
        }
        other => panic!("{other:?}"),
    }
}
