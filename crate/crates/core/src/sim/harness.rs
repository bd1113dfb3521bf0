//! Monte Carlo runs over many seeded paths, their aggregates and the
//! side-by-side comparison of two runs.

use super::config::{Emit, SimConfig};
use super::reference::{reference_card, ReferenceCard, ReferenceOptions};
use super::stats::{fmt_g, ks_normal, ks_two_sample, Quantiles};
use super::svg;
use super::SimError;
use crate::algorithm::{run, AlgorithmKind, PathRecord, RunConfig};
use crate::models::{ModelConfig, ModelSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const WORKERS_ENV: &str = "PSTEP_WORKERS";

/// Aggregates over completed paths at one step index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub k: usize,
    pub n: usize,
    pub efficiency: Quantiles,
    /// Per-path D-efficiencies in path order.
    pub efficiency_samples: Vec<f64>,
    /// `n · mean (θ̂_k − θ̄)(θ̂_k − θ̄)ᵀ`.
    pub n_mse: Vec<Vec<f64>>,
    /// Mean of `det M(ξ_k, θ̄)`.
    pub mean_det: f64,
    /// Quantiles of `‖θ̂_k − θ̄‖`.
    pub error_norm: Quantiles,
    /// Fraction of estimates on the boundary of the parameter box.
    pub boundary_fraction: f64,
}

/// `√n (θ̂ − θ̄)` at the last checkpoint, one sample vector per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalSample {
    pub k: usize,
    pub n: usize,
    pub standardized: Vec<Vec<f64>>,
    /// `(M_*⁻¹)_jj`.
    pub asymptotic_variance: Vec<f64>,
    /// Kolmogorov–Smirnov statistic of each component against `N(0, (M_*⁻¹)_jj)`.
    pub ks: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortedPath {
    pub path: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub det_star: f64,
    pub m_star_inv: Vec<Vec<f64>>,
    pub sd_star: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub schema_version: u32,
    pub kind: String,
    pub algorithm: AlgorithmKind,
    pub model: ModelConfig,
    pub theta_true: Vec<f64>,
    pub seed: u64,
    pub paths: usize,
    pub completed: usize,
    pub aborted: Vec<AbortedPath>,
    pub reference: ReferenceSummary,
    pub checkpoints: Vec<CheckpointSummary>,
    pub terminal: TerminalSample,
}

impl SimSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_str(text)).map_err(
            |e| SimError::Config {
                path: e.path().to_string(),
                message: e.into_inner().to_string(),
            },
        )
    }

    pub fn checkpoint_n(&self) -> Vec<usize> {
        self.checkpoints.iter().map(|c| c.n).collect()
    }

    pub fn at_n(&self, n: usize) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.n == n)
    }
}

/// What one path contributes at one checkpoint.
#[derive(Clone, Debug, PartialEq)]
struct PathPoint {
    efficiency: f64,
    det: f64,
    theta: Vec<f64>,
    on_boundary: bool,
}

fn path_points(rec: &PathRecord, checkpoints: &[usize]) -> Result<Vec<PathPoint>, String> {
    if let Some(reason) = &rec.aborted {
        return Err(reason.clone());
    }
    checkpoints
        .iter()
        .map(|&k| {
            let (Some(e), Some(d)) = (rec.estimates.get(k - 1), rec.diagnostics.get(k - 1)) else {
                return Err(format!("no estimate at step {k}"));
            };
            Ok(PathPoint {
                efficiency: d.efficiency.ok_or("efficiency missing")?,
                det: d.log_det_true.map_or(0.0, f64::exp),
                theta: e.theta.clone(),
                on_boundary: e.on_boundary,
            })
        })
        .collect()
}

/// Per-path configuration: the template with the master seed and path index.
pub fn path_config(cfg: &SimConfig, card: &ReferenceCard, index: u64) -> RunConfig {
    let mut run = cfg.run.clone();
    run.seed = cfg.seed;
    run.path_index = index;
    run.reference_det = Some(card.det_star);
    run
}

pub fn resolve_workers(cfg: &SimConfig) -> Result<usize, SimError> {
    if let Some(w) = cfg.workers {
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| SimError::Config {
                path: WORKERS_ENV.into(),
                message: format!("expected a positive integer, got `{s}`"),
            }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Result of [`simulate`].
#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub summary: SimSummary,
    pub card: ReferenceCard,
    /// Every path record, when `keep_paths` is set.
    pub records: Option<Vec<PathRecord>>,
    pub wall_clock_seconds: f64,
    pub workers: usize,
}

pub fn reference_for(cfg: &SimConfig, model: &ModelSpec) -> Result<ReferenceCard, SimError> {
    let opts = ReferenceOptions {
        solver: cfg.run.solver,
        numeric: cfg.run.numeric,
        grid_n: cfg.reference_grid_n,
        ..Default::default()
    };
    reference_card(model, &cfg.run.theta_true, &opts)
}

/// Runs `cfg.paths` independent paths and aggregates them at the checkpoints.
/// Path `i` is seeded by `(cfg.seed, i)` alone, and results are reduced in
/// path order, so the summary does not depend on the worker count.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutcome, SimError> {
    let model = cfg.validate()?;
    let card = reference_for(cfg, &model)?;
    let workers = resolve_workers(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;
    let started = Instant::now();
    let keep = cfg.keep_paths;
    type Outcome = ((u64, Result<Vec<PathPoint>, String>), Option<PathRecord>);
    let results: Vec<Outcome> = pool.install(|| {
        (0..cfg.paths as u64)
            .into_par_iter()
            .map(|i| match run(&path_config(cfg, &card, i), cfg.algorithm) {
                Ok(rec) => (
                    (i, path_points(&rec, &cfg.checkpoints)),
                    keep.then_some(rec),
                ),
                Err(e) => ((i, Err(e.to_string())), None),
            })
            .collect()
    });
    let wall_clock_seconds = started.elapsed().as_secs_f64();
    let (points, records): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let summary = aggregate(cfg, &model, &card, points)?;
    Ok(SimOutcome {
        summary,
        card,
        records: keep.then(|| records.into_iter().flatten().collect()),
        wall_clock_seconds,
        workers,
    })
}

/// Recomputes the summary from retained path records, in any order.
pub fn summarize_records(
    cfg: &SimConfig,
    card: &ReferenceCard,
    records: &[PathRecord],
) -> Result<SimSummary, SimError> {
    let model = cfg.validate()?;
    let mut sorted: Vec<&PathRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.config.path_index);
    let points = sorted
        .iter()
        .map(|r| (r.config.path_index, path_points(r, &cfg.checkpoints)))
        .collect();
    aggregate(cfg, &model, card, points)
}

fn aggregate(
    cfg: &SimConfig,
    model: &ModelSpec,
    card: &ReferenceCard,
    points: Vec<(u64, Result<Vec<PathPoint>, String>)>,
) -> Result<SimSummary, SimError> {
    let p = model.p();
    let mut aborted = Vec::new();
    let mut done = Vec::new();
    for (path, r) in points {
        match r {
            Ok(v) => done.push(v),
            Err(reason) => aborted.push(AbortedPath { path, reason }),
        }
    }
    // more than 1% of paths aborting fails the run
    if aborted.len() * 100 > cfg.paths || done.is_empty() {
        return Err(SimError::TooManyAborts {
            aborted: aborted.len(),
            paths: cfg.paths,
            first: aborted
                .first()
                .map(|a| a.reason.clone())
                .unwrap_or_default(),
        });
    }
    let theta = &cfg.run.theta_true;
    let r = done.len() as f64;
    let mut checkpoints = Vec::with_capacity(cfg.checkpoints.len());
    for (c, &k) in cfg.checkpoints.iter().enumerate() {
        let n = cfg.n_at(model, k);
        let at: Vec<&PathPoint> = done.iter().map(|v| &v[c]).collect();
        let efficiency_samples: Vec<f64> = at.iter().map(|q| q.efficiency).collect();
        let mut mse = vec![vec![0.0; p]; p];
        let mut det_sum = 0.0;
        let mut norms = Vec::with_capacity(at.len());
        let mut boundary = 0usize;
        for q in &at {
            let e: Vec<f64> = q.theta.iter().zip(theta).map(|(a, b)| a - b).collect();
            for i in 0..p {
                for j in 0..p {
                    mse[i][j] += e[i] * e[j];
                }
            }
            det_sum += q.det;
            norms.push(e.iter().map(|v| v * v).sum::<f64>().sqrt());
            boundary += q.on_boundary as usize;
        }
        for row in &mut mse {
            for v in row.iter_mut() {
                *v *= n as f64 / r;
            }
        }
        checkpoints.push(CheckpointSummary {
            k,
            n,
            efficiency: Quantiles::of(&efficiency_samples).expect("nonempty"),
            efficiency_samples,
            n_mse: mse,
            mean_det: det_sum / r,
            error_norm: Quantiles::of(&norms).expect("nonempty"),
            boundary_fraction: boundary as f64 / r,
        });
    }
    let last = cfg.checkpoints.len() - 1;
    let (k, n) = (checkpoints[last].k, checkpoints[last].n);
    let asymptotic_variance: Vec<f64> = (0..p).map(|j| card.m_star_inv[j][j]).collect();
    let standardized: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            done.iter()
                .map(|v| (n as f64).sqrt() * (v[last].theta[j] - theta[j]))
                .collect()
        })
        .collect();
    let ks = standardized
        .iter()
        .zip(&asymptotic_variance)
        .map(|(s, &var)| ks_normal(s, var))
        .collect();
    Ok(SimSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        kind: "sim_summary".into(),
        algorithm: cfg.algorithm,
        model: cfg.run.model.clone(),
        theta_true: theta.clone(),
        seed: cfg.seed,
        paths: cfg.paths,
        completed: done.len(),
        aborted,
        reference: ReferenceSummary {
            det_star: card.det_star,
            m_star_inv: card.m_star_inv.clone(),
            sd_star: card.sd_star,
        },
        checkpoints,
        terminal: TerminalSample {
            k,
            n,
            standardized,
            asymptotic_variance,
            ks,
        },
    })
}

/// Long-format table `k,n,stat_name,component,value` with `%.10g` values.
pub fn summary_csv(summary: &SimSummary) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "n", "stat_name", "component", "value"])?;
    let mut row = |k: usize, n: usize, stat: &str, comp: &str, v: f64| {
        w.write_record([
            k.to_string(),
            n.to_string(),
            stat.into(),
            comp.into(),
            fmt_g(v, 10),
        ])
    };
    for c in &summary.checkpoints {
        for (name, v) in c.efficiency.as_pairs() {
            row(c.k, c.n, "efficiency", name, v)?;
        }
        for (i, r) in c.n_mse.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                row(c.k, c.n, "n_mse", &format!("{}_{}", i + 1, j + 1), v)?;
            }
        }
        row(c.k, c.n, "mean_det", "all", c.mean_det)?;
        for (name, v) in c.error_norm.as_pairs() {
            row(c.k, c.n, "error_norm", name, v)?;
        }
        row(c.k, c.n, "boundary_fraction", "all", c.boundary_fraction)?;
    }
    let t = &summary.terminal;
    for (j, &ks) in t.ks.iter().enumerate() {
        row(t.k, t.n, "ks_standardized", &format!("theta{}", j + 1), ks)?;
    }
    let bytes = w.into_inner().map_err(|e| SimError::Io {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_seconds: f64,
    pub workers: usize,
    pub paths: usize,
}

fn write(path: &Path, text: &str) -> Result<(), SimError> {
    fs::write(path, text).map_err(|e| SimError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes the requested artifacts into `dir` and returns their paths.
/// Timing goes to its own file so the summary stays reproducible.
pub fn write_outputs(
    outcome: &SimOutcome,
    emit: &[Emit],
    dir: &Path,
) -> Result<Vec<PathBuf>, SimError> {
    fs::create_dir_all(dir).map_err(|e| SimError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<(), SimError> {
        let path = dir.join(name);
        write(&path, &text)?;
        written.push(path);
        Ok(())
    };
    if emit.contains(&Emit::Json) {
        put("summary.json", outcome.summary.to_json())?;
        put(
            "reference_card.json",
            serde_json::to_string_pretty(&outcome.card).expect("cards serialize"),
        )?;
    }
    if emit.contains(&Emit::Csv) {
        put("tables.csv", summary_csv(&outcome.summary)?)?;
    }
    if emit.contains(&Emit::Svg) {
        put("figure.svg", svg::render(&outcome.summary))?;
    }
    let timing = Timing {
        wall_clock_seconds: outcome.wall_clock_seconds,
        workers: outcome.workers,
        paths: outcome.summary.paths,
    };
    put(
        "timing.json",
        serde_json::to_string_pretty(&timing).expect("timing serializes"),
    )?;
    if let Some(records) = &outcome.records {
        let sub = dir.join("paths");
        fs::create_dir_all(&sub).map_err(|e| SimError::Io {
            path: sub.clone(),
            message: e.to_string(),
        })?;
        for r in records {
            let path = sub.join(format!("path_{:06}.json", r.config.path_index));
            write(&path, &r.to_json())?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub k_a: usize,
    pub k_b: usize,
    pub efficiency_a: Quantiles,
    pub efficiency_b: Quantiles,
    /// Median efficiency of `a` minus that of `b`.
    pub median_delta: f64,
    /// Two-sample Kolmogorov–Smirnov distance between the efficiency samples.
    pub efficiency_ks: f64,
    pub n_mse_diag_a: Vec<f64>,
    pub n_mse_diag_b: Vec<f64>,
    pub mean_det_a: f64,
    pub mean_det_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub kind: String,
    pub algorithm_a: AlgorithmKind,
    pub algorithm_b: AlgorithmKind,
    pub rows: Vec<ComparisonRow>,
    /// Wall-clock seconds of the two runs when they were executed here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<[f64; 2]>,
}

/// Aligns two summaries on total sample size `n`.
pub fn compare(a: &SimSummary, b: &SimSummary) -> Result<ComparisonReport, SimError> {
    if a.model != b.model || a.theta_true != b.theta_true {
        return Err(SimError::Mismatch(
            "the summaries are for different models or true parameters".into(),
        ));
    }
    let (na, nb) = (a.checkpoint_n(), b.checkpoint_n());
    if na != nb {
        return Err(SimError::MisalignedCheckpoints { a: na, b: nb });
    }
    let diag = |m: &Vec<Vec<f64>>| (0..m.len()).map(|i| m[i][i]).collect::<Vec<f64>>();
    let rows = a
        .checkpoints
        .iter()
        .zip(&b.checkpoints)
        .map(|(x, y)| ComparisonRow {
            n: x.n,
            k_a: x.k,
            k_b: y.k,
            efficiency_a: x.efficiency,
            efficiency_b: y.efficiency,
            median_delta: x.efficiency.median - y.efficiency.median,
            efficiency_ks: ks_two_sample(&x.efficiency_samples, &y.efficiency_samples),
            n_mse_diag_a: diag(&x.n_mse),
            n_mse_diag_b: diag(&y.n_mse),
            mean_det_a: x.mean_det,
            mean_det_b: y.mean_det,
        })
        .collect();
    Ok(ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: "comparison_report".into(),
        algorithm_a: a.algorithm,
        algorithm_b: b.algorithm,
        rows,
        wall_clock_seconds: None,
    })
}

pub fn comparison_csv(report: &ComparisonReport) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n",
        "k_a",
        "k_b",
        "stat_name",
        "component",
        "value_a",
        "value_b",
    ])?;
    for r in &report.rows {
        let mut row = |stat: &str, comp: &str, va: f64, vb: f64| {
            w.write_record([
                r.n.to_string(),
                r.k_a.to_string(),
                r.k_b.to_string(),
                stat.into(),
                comp.into(),
                fmt_g(va, 10),
                fmt_g(vb, 10),
            ])
        };
        for ((name, va), (_, vb)) in r
            .efficiency_a
            .as_pairs()
            .into_iter()
            .zip(r.efficiency_b.as_pairs())
        {
            row("efficiency", name, va, vb)?;
        }
        for (j, (va, vb)) in r.n_mse_diag_a.iter().zip(&r.n_mse_diag_b).enumerate() {
            row("n_mse", &format!("{}_{}", j + 1, j + 1), *va, *vb)?;
        }
        row("mean_det", "all", r.mean_det_a, r.mean_det_b)?;
        row("efficiency_ks", "all", r.efficiency_ks, r.efficiency_ks)?;
    }
    let bytes = w.into_inner().map_err(|e| SimError::Io {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::EstimatorKind;
    use crate::design::DesignPoint;
    use crate::estimators::ErrorModel;
    use crate::models::{builtin, BoxRegion, ModelOptions};

    fn logit_cfg(paths: usize, steps: usize) -> SimConfig {
        let m = builtin(
            "logit",
            BoxRegion::new(vec![-10.0, 0.1], vec![10.0, 10.0]).unwrap(),
            BoxRegion::new(vec![-4.0], vec![4.0]).unwrap(),
            &ModelOptions::default(),
        )
        .unwrap();
        let mut run = RunConfig::new(
            &m,
            vec![0.0, 1.0],
            EstimatorKind::Mle,
            steps,
            ErrorModel::ExponentialFamily,
        );
        run.initial_points = vec![
            DesignPoint(vec![-4.0]),
            DesignPoint(vec![0.0]),
            DesignPoint(vec![4.0]),
        ];
        run.fit.starts = 0;
        let mut cfg = SimConfig::new(run, AlgorithmKind::PStep, paths);
        cfg.seed = 17;
        cfg.workers = Some(2);
        cfg
    }

    #[test]
    fn single_path_quantiles_collapse() {
        let mut cfg = logit_cfg(1, 4);
        cfg.keep_paths = true;
        let out = simulate(&cfg).unwrap();
        let rec = &out.records.as_ref().unwrap()[0];
        for c in &out.summary.checkpoints {
            let eff = rec.diagnostics[c.k - 1].efficiency.unwrap();
            assert!(c.efficiency.as_pairs().iter().all(|&(_, v)| v == eff));
            assert_eq!(c.n, rec.estimates[c.k - 1].n);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = logit_cfg(12, 6);
        cfg.workers = Some(1);
        let one = simulate(&cfg).unwrap().summary;
        cfg.workers = Some(3);
        let three = simulate(&cfg).unwrap().summary;
        assert_eq!(one.to_json(), three.to_json());
        assert_eq!(summary_csv(&one).unwrap(), summary_csv(&three).unwrap());
    }

    #[test]
    fn streamed_aggregates_match_raw_records() {
        let mut cfg = logit_cfg(8, 5);
        cfg.keep_paths = true;
        let out = simulate(&cfg).unwrap();
        let mut recs = out.records.clone().unwrap();
        recs.reverse();
        let again = summarize_records(&cfg, &out.card, &recs).unwrap();
        for (a, b) in out.summary.checkpoints.iter().zip(&again.checkpoints) {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (a.n_mse[i][j] - b.n_mse[i][j]).abs()
                            <= 1e-12 * a.n_mse[i][j].abs().max(1.0)
                    );
                }
            }
            assert!((a.efficiency.median - b.efficiency.median).abs() <= 1e-12);
        }
        assert_eq!(out.summary, again);
    }

    #[test]
    fn summary_invariants() {
        let s = simulate(&logit_cfg(10, 8)).unwrap().summary;
        for c in &s.checkpoints {
            assert!(c.efficiency.is_monotone() && c.error_norm.is_monotone());
            assert!((c.n_mse[0][1] - c.n_mse[1][0]).abs() == 0.0);
            assert!(
                c.n_mse[0][0] >= 0.0
                    && c.n_mse[0][0] * c.n_mse[1][1] >= c.n_mse[0][1].powi(2) * (1.0 - 1e-12)
            );
        }
        let csv = summary_csv(&s).unwrap();
        assert!(csv.starts_with("k,n,stat_name,component,value\n"));
        assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 5));
    }

    #[test]
    fn abort_threshold() {
        let mut cfg = logit_cfg(3, 2);
        let model = cfg.validate().unwrap();
        let card = reference_for(&cfg, &model).unwrap();
        let ok = || {
            Ok(vec![
                PathPoint {
                    efficiency: 0.5,
                    det: 0.1,
                    theta: vec![0.0, 1.0],
                    on_boundary: false
                };
                2
            ])
        };
        let pts = vec![(0, ok()), (1, Err("boom".to_string())), (2, ok())];
        assert!(matches!(
            aggregate(&cfg, &model, &card, pts),
            Err(SimError::TooManyAborts {
                aborted: 1,
                paths: 3,
                ..
            })
        ));
        cfg.paths = 200;
        let mut pts: Vec<_> = (0..200).map(|i| (i, ok())).collect();
        pts[7].1 = Err("boom".into());
        pts[9].1 = Err("boom".into());
        let s = aggregate(&cfg, &model, &card, pts).unwrap();
        assert_eq!(s.completed, 198);
        assert_eq!(
            s.aborted.iter().map(|a| a.path).collect::<Vec<_>>(),
            vec![7, 9]
        );
    }

    #[test]
    fn compare_identical_and_misaligned() {
        let s = simulate(&logit_cfg(4, 3)).unwrap().summary;
        let r = compare(&s, &s).unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.median_delta == 0.0 && row.efficiency_ks == 0.0));
        let mut t = s.clone();
        t.checkpoints.pop();
        assert!(matches!(
            compare(&s, &t),
            Err(SimError::MisalignedCheckpoints { .. })
        ));
        let mut u = s.clone();
        u.theta_true = vec![0.5, 1.0];
        assert!(matches!(compare(&s, &u), Err(SimError::Mismatch(_))));
        assert!(comparison_csv(&r).unwrap().lines().count() > 1);
    }
}
