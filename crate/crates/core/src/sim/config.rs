//! Versioned JSON configuration files.
//!
//! Numeric fields may be given as JSON numbers or as decimal strings
//! (`"0.3"`, `"-4"`, `"1e-3"`). Every error names the offending field.

use super::SimError;
use crate::algorithm::{AlgorithmKind, RunConfig};
use crate::design::Design;
use crate::models::ModelSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::PathBuf;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn config_err(path: impl Into<String>, message: impl Into<String>) -> SimError {
    SimError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn is_decimal(s: &str) -> bool {
    let s = s.trim();
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (mant, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, Some(e)),
        None => (body, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let mant_ok = match mant.split_once('.') {
        Some((a, b)) => {
            (digits(a) || a.is_empty())
                && (digits(b) || b.is_empty())
                && !(a.is_empty() && b.is_empty())
        }
        None => digits(mant),
    };
    let exp_ok = exp.map_or(true, |e| digits(e.strip_prefix(['-', '+']).unwrap_or(e)));
    mant_ok && exp_ok
}

/// Replaces decimal strings by JSON numbers, recursively.
pub fn normalize_numbers(v: Value) -> Value {
    match v {
        Value::String(s) if is_decimal(&s) => {
            let t = s.trim();
            if let Ok(i) = t.parse::<i64>() {
                Value::from(i)
            } else if let Ok(u) = t.parse::<u64>() {
                Value::from(u)
            } else {
                match t.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                    Some(n) => Value::Number(n),
                    None => Value::String(s),
                }
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_numbers).collect()),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, v)| (k, normalize_numbers(v)))
                .collect(),
        ),
        other => other,
    }
}

fn deserialize_at<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T, SimError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner == ".") {
            (true, _) => inner,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{inner}"),
        };
        config_err(path, e.into_inner().to_string())
    })
}

fn take_schema_version(obj: &mut Map<String, Value>) -> Result<(), SimError> {
    match obj.remove("schema_version") {
        None => Err(config_err("schema_version", "missing required field")),
        Some(v) => match v.as_u64() {
            Some(x) if x == CONFIG_SCHEMA_VERSION as u64 => Ok(()),
            _ => Err(config_err(
                "schema_version",
                format!("unsupported version {v}, expected {CONFIG_SCHEMA_VERSION}"),
            )),
        },
    }
}

fn parse_object(text: &str) -> Result<Map<String, Value>, SimError> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| config_err(".", format!("not valid JSON: {e}")))?;
    match normalize_numbers(v) {
        Value::Object(o) => Ok(o),
        _ => Err(config_err(".", "expected a JSON object")),
    }
}

/// A run template plus the optional initial design weights, which must be
/// uniform since every initial point is observed once.
fn run_from_object(mut obj: Map<String, Value>, prefix: &str) -> Result<RunConfig, SimError> {
    let join = |f: &str| {
        if prefix.is_empty() {
            f.to_string()
        } else {
            format!("{prefix}.{f}")
        }
    };
    let weights: Option<Vec<f64>> = match obj.remove("initial_weights") {
        None | Some(Value::Null) => None,
        Some(v) => Some(deserialize_at(v, &join("initial_weights"))?),
    };
    let cfg: RunConfig = deserialize_at(Value::Object(obj), prefix)?;
    if let Some(w) = weights {
        check_initial_weights(&cfg, &w, &join("initial_weights"))?;
    }
    cfg.validate().map_err(|e| match e {
        crate::algorithm::AlgoError::Config { path, message } => config_err(join(&path), message),
        other => config_err(prefix, other.to_string()),
    })?;
    Ok(cfg)
}

fn check_initial_weights(cfg: &RunConfig, w: &[f64], path: &str) -> Result<(), SimError> {
    if w.len() != cfg.initial_points.len() {
        return Err(config_err(
            path,
            format!(
                "{} weights for {} initial points",
                w.len(),
                cfg.initial_points.len()
            ),
        ));
    }
    Design::new(cfg.initial_points.clone(), w.to_vec())
        .map_err(|e| config_err(path, e.to_string()))?;
    if let Some(i) = w.iter().position(|&x| x <= 0.0) {
        return Err(config_err(
            format!("{path}[{i}]"),
            "weights must be positive",
        ));
    }
    let u = 1.0 / w.len() as f64;
    if let Some(i) = w.iter().position(|&x| (x - u).abs() > 1e-12) {
        return Err(config_err(
            format!("{path}[{i}]"),
            format!("initial points are observed once each, so weights must all be {u}"),
        ));
    }
    Ok(())
}

/// Parses a run configuration file (`schema_version` plus the run fields,
/// optionally `algorithm` and `initial_weights`).
pub fn parse_run_file(text: &str) -> Result<(RunConfig, AlgorithmKind), SimError> {
    let mut obj = parse_object(text)?;
    take_schema_version(&mut obj)?;
    let algorithm = match obj.remove("algorithm") {
        None => AlgorithmKind::PStep,
        Some(v) => deserialize_at(v, "algorithm")?,
    };
    Ok((run_from_object(obj, "")?, algorithm))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Csv,
    Json,
    Svg,
}

/// The raw file layout of a simulation config, before the run template is
/// validated.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    #[serde(default = "default_algorithm")]
    algorithm: AlgorithmKind,
    paths: usize,
    #[serde(default)]
    checkpoints: Option<Vec<usize>>,
    #[serde(default)]
    checkpoint_n: Option<Vec<usize>>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    workers: Option<usize>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default = "default_emit")]
    emit: Vec<Emit>,
    #[serde(default)]
    keep_paths: bool,
    /// Grid points per axis for the reference design check.
    #[serde(default)]
    reference_grid_n: Option<usize>,
}

fn default_algorithm() -> AlgorithmKind {
    AlgorithmKind::PStep
}

fn default_emit() -> Vec<Emit> {
    vec![Emit::Csv, Emit::Json]
}

/// Monte Carlo configuration: `paths` replications of the `run` template.
/// Each path `i` runs with the master `seed` and `path_index = i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub run: RunConfig,
    pub algorithm: AlgorithmKind,
    pub paths: usize,
    /// Step indices `k ∈ [1, steps]` at which aggregates are taken.
    pub checkpoints: Vec<usize>,
    pub seed: u64,
    /// Worker threads; `None` means the `PSTEP_WORKERS` variable or all cores.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit: Vec<Emit>,
    pub keep_paths: bool,
    pub reference_grid_n: Option<usize>,
}

impl SimConfig {
    pub fn new(run: RunConfig, algorithm: AlgorithmKind, paths: usize) -> Self {
        let checkpoints = default_checkpoints(run.steps);
        let seed = run.seed;
        SimConfig {
            run,
            algorithm,
            paths,
            checkpoints,
            seed,
            workers: None,
            out: None,
            emit: default_emit(),
            keep_paths: false,
            reference_grid_n: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let mut obj = parse_object(text)?;
        take_schema_version(&mut obj)?;
        let run_obj = match obj.remove("run") {
            Some(Value::Object(o)) => o,
            Some(_) => return Err(config_err("run", "expected an object")),
            None => return Err(config_err("run", "missing required field")),
        };
        let file: SimFile = deserialize_at(Value::Object(obj), "")?;
        let run = run_from_object(run_obj, "run")?;
        let mut cfg = SimConfig {
            checkpoints: Vec::new(),
            run,
            algorithm: file.algorithm,
            paths: file.paths,
            seed: file.seed,
            workers: file.workers,
            out: file.out,
            emit: file.emit,
            keep_paths: file.keep_paths,
            reference_grid_n: file.reference_grid_n,
        };
        cfg.checkpoints = match (file.checkpoints, file.checkpoint_n) {
            (Some(_), Some(_)) => {
                return Err(config_err(
                    "checkpoint_n",
                    "give either checkpoints or checkpoint_n",
                ))
            }
            (Some(k), None) => k,
            (None, Some(ns)) => {
                let model = cfg
                    .run
                    .validate()
                    .map_err(|e| config_err("run", e.to_string()))?;
                let mut ks = Vec::with_capacity(ns.len());
                for (i, &n) in ns.iter().enumerate() {
                    ks.push(cfg.k_for_n(&model, n).ok_or_else(|| {
                        config_err(
                            format!("checkpoint_n[{i}]"),
                            format!("n = {n} is not reached by any step"),
                        )
                    })?);
                }
                ks
            }
            (None, None) => default_checkpoints(cfg.run.steps),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Changes the number of steps. Default checkpoints follow the new
    /// length; explicit ones are kept up to it.
    pub fn set_steps(&mut self, steps: usize) {
        if self.checkpoints == default_checkpoints(self.run.steps) {
            self.checkpoints = default_checkpoints(steps);
        } else {
            self.checkpoints.retain(|&k| k <= steps);
            if self.checkpoints.is_empty() {
                self.checkpoints = default_checkpoints(steps);
            }
        }
        self.run.steps = steps;
    }

    /// Number of initial observations.
    pub fn n1(&self, model: &ModelSpec) -> usize {
        if self.run.initial_points.is_empty() {
            model.p()
        } else {
            self.run.initial_points.len()
        }
    }

    pub fn batch_size(&self, model: &ModelSpec) -> usize {
        match self.algorithm {
            AlgorithmKind::PStep => model.p(),
            AlgorithmKind::Wynn => 1,
        }
    }

    pub fn n_at(&self, model: &ModelSpec, k: usize) -> usize {
        self.n1(model) + (k - 1) * self.batch_size(model)
    }

    fn k_for_n(&self, model: &ModelSpec, n: usize) -> Option<usize> {
        let (n1, q) = (self.n1(model), self.batch_size(model));
        (n >= n1 && (n - n1) % q == 0).then(|| (n - n1) / q + 1)
    }

    pub fn validate(&self) -> Result<ModelSpec, SimError> {
        let model = self.run.validate().map_err(|e| match e {
            crate::algorithm::AlgoError::Config { path, message } => {
                config_err(format!("run.{path}"), message)
            }
            other => config_err("run", other.to_string()),
        })?;
        if self.paths == 0 {
            return Err(config_err("paths", "must be at least 1"));
        }
        if self.checkpoints.is_empty() {
            return Err(config_err("checkpoints", "must not be empty"));
        }
        for (i, &k) in self.checkpoints.iter().enumerate() {
            if k == 0 || k > self.run.steps {
                return Err(config_err(
                    format!("checkpoints[{i}]"),
                    format!("{k} is outside [1, {}]", self.run.steps),
                ));
            }
            if i > 0 && k <= self.checkpoints[i - 1] {
                return Err(config_err(
                    format!("checkpoints[{i}]"),
                    "checkpoints must be increasing",
                ));
            }
        }
        if self.workers == Some(0) {
            return Err(config_err("workers", "must be at least 1"));
        }
        if self.reference_grid_n.is_some_and(|g| g < 2) {
            return Err(config_err("reference_grid_n", "must be at least 2"));
        }
        Ok(model)
    }
}

/// Ten roughly even step indices ending at `steps`.
pub fn default_checkpoints(steps: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (1..=10)
        .map(|i| ((steps * i) as f64 / 10.0).round() as usize)
        .collect();
    ks.retain(|&k| k >= 1);
    ks.dedup();
    if ks.last() != Some(&steps) {
        ks.push(steps);
    }
    ks
}
