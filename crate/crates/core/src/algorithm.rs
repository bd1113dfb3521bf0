//! Adaptive design drivers: the p-step-ahead algorithm and the adaptive
//! Wynn one-point rule.
//!
//! Step `k` holds `n_k` observations; the estimate `θ_k` is fitted to them and
//! the next batch is chosen at `θ_k`. For the p-step rule
//! `n_k = n₁ + (k-1)p`, for Wynn `n_k = n₁ + (k-1)`.

use crate::design::{add_outer, symmetrize_lower, DesignPoint, Sensitivity};
use crate::estimators::{
    lse_fit, mle_fit, sample_response, Dataset, ErrorModel, EstimError, FitOptions,
};
use crate::linalg;
use crate::models::{ModelConfig, ModelError, ModelSpec};
use crate::rng::SeededStream;
use crate::saturated::{self, NumericOptions, SaturatedError, SolverChoice};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AlgoError {
    #[error("invalid run configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("initial design information is singular at theta = {0:?}")]
    SingularInitial(Vec<f64>),
    #[error("path record version {found} does not match {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("path record is inconsistent: {0}")]
    IntegrityError(String),
    #[error("replay diverged from the recorded path: {0}")]
    Diverged(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimation(#[from] EstimError),
    #[error(transparent)]
    Saturated(#[from] SaturatedError),
}

fn config_err(path: &str, message: impl Into<String>) -> AlgoError {
    AlgoError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Lse,
    Mle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    PStep,
    Wynn,
}

/// Knobs of the estimator used at every step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSettings {
    /// Latin-hypercube starts besides the warm start from the previous step.
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_starts() -> usize {
    16
}

fn default_max_iter() -> usize {
    200
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            starts: default_starts(),
            max_iter: default_max_iter(),
        }
    }
}

fn default_wynn_grid() -> usize {
    2001
}

fn default_wynn_starts() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub theta_true: Vec<f64>,
    /// Initial design points, each observed once. Empty means the saturated
    /// optimum at the center of the parameter box.
    #[serde(default)]
    pub initial_points: Vec<DesignPoint>,
    pub estimator: EstimatorKind,
    pub steps: usize,
    pub error: ErrorModel,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub path_index: u64,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub fit: FitSettings,
    #[serde(default)]
    pub numeric: NumericOptions,
    #[serde(default = "default_wynn_grid")]
    pub wynn_grid_n: usize,
    #[serde(default = "default_wynn_starts")]
    pub wynn_starts: usize,
    /// `det M_*(θ̄)`, enables per-step D-efficiencies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_det: Option<f64>,
}

impl RunConfig {
    pub fn new(
        model: &ModelSpec,
        theta_true: Vec<f64>,
        estimator: EstimatorKind,
        steps: usize,
        error: ErrorModel,
    ) -> Self {
        RunConfig {
            model: ModelConfig::from(model),
            theta_true,
            initial_points: Vec::new(),
            estimator,
            steps,
            error,
            seed: 0,
            path_index: 0,
            solver: SolverChoice::default(),
            fit: FitSettings::default(),
            numeric: NumericOptions::default(),
            wynn_grid_n: default_wynn_grid(),
            wynn_starts: default_wynn_starts(),
            reference_det: None,
        }
    }

    /// Builds the model and checks every field; errors name the field.
    pub fn validate(&self) -> Result<ModelSpec, AlgoError> {
        let model = self
            .model
            .build()
            .map_err(|e| config_err("model", e.to_string()))?;
        model
            .check_theta(&self.theta_true)
            .map_err(|e| config_err("theta_true", e.to_string()))?;
        if !model.theta_box().contains(&self.theta_true) {
            return Err(config_err("theta_true", "outside the parameter box"));
        }
        for (i, x) in self.initial_points.iter().enumerate() {
            model
                .check_point(x.coords())
                .map_err(|e| config_err(&format!("initial_points[{i}]"), e.to_string()))?;
        }
        if self.steps == 0 {
            return Err(config_err("steps", "must be at least 1"));
        }
        self.error
            .validate()
            .map_err(|e| config_err("error.sigma", e.to_string()))?;
        if self.estimator == EstimatorKind::Mle && model.glm_block().is_none() {
            return Err(config_err(
                "estimator",
                format!("mle needs a GLM model, got {}", model.name()),
            ));
        }
        if self.error == ErrorModel::ExponentialFamily && model.glm_block().is_none() {
            return Err(config_err(
                "error",
                format!("{} has no exponential family", model.name()),
            ));
        }
        if self.numeric.starts == 0 || self.numeric.grid_n < 2 {
            return Err(config_err(
                "numeric",
                "starts >= 1 and grid_n >= 2 required",
            ));
        }
        if self.wynn_grid_n < 2 {
            return Err(config_err("wynn_grid_n", "must be at least 2"));
        }
        if let Some(d) = self.reference_det {
            if !(d > 0.0 && d.is_finite()) {
                return Err(config_err("reference_det", "must be positive"));
            }
        }
        Ok(model)
    }

    fn initial_design(&self, model: &ModelSpec) -> Result<Vec<DesignPoint>, AlgoError> {
        if !self.initial_points.is_empty() {
            return Ok(self.initial_points.clone());
        }
        let center = model.theta_box().center();
        let s = saturated::solve_saturated(model, &center, self.solver, &self.numeric)?;
        Ok(s.points.points().to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEstimate {
    pub k: usize,
    pub n: usize,
    pub theta: Vec<f64>,
    pub objective: f64,
    pub on_boundary: bool,
    pub converged: bool,
    /// The fit failed to converge and the previous estimate was kept.
    pub reused_previous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub k: usize,
    pub points: Vec<DesignPoint>,
    /// `det[f_θ_k(batch)]²` for p-step, the maximal sensitivity for Wynn.
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub k: usize,
    pub n: usize,
    /// `ln det M(ξ_k, θ̄)`; `None` when singular.
    pub log_det_true: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub version: u32,
    pub algorithm: AlgorithmKind,
    pub config: RunConfig,
    pub n1: usize,
    pub points: Vec<DesignPoint>,
    pub responses: Vec<f64>,
    pub estimates: Vec<StepEstimate>,
    pub batches: Vec<Batch>,
    pub diagnostics: Vec<StepDiagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

impl PathRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("path records serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, AlgoError> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| AlgoError::IntegrityError(e.to_string()))?;
        if let Some(found) = v.get("version").and_then(|x| x.as_u64()) {
            if found != RECORD_VERSION as u64 {
                return Err(AlgoError::VersionMismatch {
                    found: found as u32,
                    expected: RECORD_VERSION,
                });
            }
        }
        let rec: PathRecord =
            serde_json::from_value(v).map_err(|e| AlgoError::IntegrityError(e.to_string()))?;
        rec.check_integrity()?;
        Ok(rec)
    }

    /// Batch size per step: `p` for the p-step rule, 1 for Wynn.
    pub fn batch_size(&self) -> usize {
        match self.algorithm {
            AlgorithmKind::PStep => self.config.model.build().map(|m| m.p()).unwrap_or(1),
            AlgorithmKind::Wynn => 1,
        }
    }

    /// `n_k`.
    pub fn n_at(&self, k: usize) -> usize {
        self.n1 + (k - 1) * self.batch_size()
    }

    /// Structural consistency of the bookkeeping.
    pub fn check_integrity(&self) -> Result<(), AlgoError> {
        let bad = |m: String| Err(AlgoError::IntegrityError(m));
        if self.version != RECORD_VERSION {
            return Err(AlgoError::VersionMismatch {
                found: self.version,
                expected: RECORD_VERSION,
            });
        }
        if self.points.len() != self.responses.len() {
            return bad(format!(
                "{} points, {} responses",
                self.points.len(),
                self.responses.len()
            ));
        }
        let q = self.batch_size();
        let steps = self.batches.len();
        if self.aborted.is_none() && steps != self.config.steps {
            return bad(format!("{steps} batches for {} steps", self.config.steps));
        }
        if self.points.len() != self.n1 + steps * q {
            return bad(format!(
                "{} points, expected {}",
                self.points.len(),
                self.n1 + steps * q
            ));
        }
        if self.estimates.len() != steps + 1 || self.diagnostics.len() != steps + 1 {
            return bad(format!(
                "{} estimates and {} diagnostics for {steps} batches",
                self.estimates.len(),
                self.diagnostics.len()
            ));
        }
        for (i, e) in self.estimates.iter().enumerate() {
            if e.k != i + 1 || e.n != self.n_at(i + 1) {
                return bad(format!("estimate {i} has k={} n={}", e.k, e.n));
            }
        }
        for (i, b) in self.batches.iter().enumerate() {
            let start = self.n_at(i + 1);
            if b.k != i + 1 || b.points.len() != q || b.points[..] != self.points[start..start + q]
            {
                return bad(format!("batch {} does not match the point list", i + 1));
            }
        }
        Ok(())
    }
}

/// Running `Σ f_θ̄ f_θ̄ᵀ` over the observed points.
struct TrueInfo {
    sum: DMatrix<f64>,
    f: Vec<f64>,
}

impl TrueInfo {
    fn new(p: usize) -> Self {
        TrueInfo {
            sum: DMatrix::zeros(p, p),
            f: vec![0.0; p],
        }
    }

    fn add(&mut self, model: &ModelSpec, theta: &[f64], x: &DesignPoint) {
        model.f_theta_into(x.coords(), theta, &mut self.f);
        add_outer(&mut self.sum, &self.f, 1.0);
    }

    fn diagnostics(&self, k: usize, n: usize, reference: Option<f64>) -> StepDiagnostics {
        let mut m = self.sum.clone();
        symmetrize_lower(&mut m);
        m /= n as f64;
        let ld = linalg::log_det_sym(&m);
        let log_det_true = (ld > f64::NEG_INFINITY).then_some(ld);
        let p = m.nrows() as f64;
        let efficiency = reference.map(|d| match log_det_true {
            Some(l) => ((l - d.ln()) / p).exp(),
            None => 0.0,
        });
        StepDiagnostics {
            k,
            n,
            log_det_true,
            efficiency,
        }
    }
}

struct Driver<'a> {
    cfg: &'a RunConfig,
    model: ModelSpec,
    stream: SeededStream,
    data: Dataset,
    info: TrueInfo,
    record: PathRecord,
}

impl<'a> Driver<'a> {
    fn start(cfg: &'a RunConfig, algorithm: AlgorithmKind) -> Result<Self, AlgoError> {
        let model = cfg.validate()?;
        let init = cfg.initial_design(&model)?;
        let stream = SeededStream::new(cfg.seed, cfg.path_index);
        let mut d = Driver {
            info: TrueInfo::new(model.p()),
            cfg,
            stream,
            data: Dataset::default(),
            record: PathRecord {
                version: RECORD_VERSION,
                algorithm,
                config: cfg.clone(),
                n1: init.len(),
                points: Vec::new(),
                responses: Vec::new(),
                estimates: Vec::new(),
                batches: Vec::new(),
                diagnostics: Vec::new(),
                aborted: None,
            },
            model,
        };
        if algorithm == AlgorithmKind::Wynn {
            d.probe_initial(&init)?;
        }
        for x in init {
            d.observe(x)?;
        }
        Ok(d)
    }

    /// The initial design must have full rank at every `θ` of a grid over
    /// `Θ`. Rows are normalized first: positive scaling does not change the
    /// rank, and at corners of `Θ` the raw weights can span many decades.
    fn probe_initial(&self, init: &[DesignPoint]) -> Result<(), AlgoError> {
        let p = self.model.p();
        for th in self.model.theta_box().grid(5) {
            let mut data = Vec::with_capacity(init.len() * p);
            for x in init {
                let f = self.model.f_theta(x.coords(), &th);
                let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm > 0.0) {
                    continue;
                }
                data.extend(f.iter().map(|v| v / norm));
            }
            let rows = data.len() / p;
            if rows < p {
                return Err(AlgoError::SingularInitial(th));
            }
            let r = DMatrix::from_row_slice(rows, p, &data).qr().r();
            let small = (0..p)
                .map(|j| r[(j, j)].abs())
                .fold(f64::INFINITY, f64::min);
            if !(small > 1e-6) {
                return Err(AlgoError::SingularInitial(th));
            }
        }
        Ok(())
    }

    fn observe(&mut self, x: DesignPoint) -> Result<(), AlgoError> {
        let i = self.data.len() as u64;
        let y = sample_response(
            &self.model,
            &x,
            &self.cfg.theta_true,
            &self.cfg.error,
            &mut self.stream.observation_rng(i),
        )?;
        self.info.add(&self.model, &self.cfg.theta_true, &x);
        self.record.points.push(x.clone());
        self.record.responses.push(y);
        self.data.push(x, y);
        Ok(())
    }

    /// Fits `θ_k` on the current data and records diagnostics for step `k`.
    fn fit(&mut self, k: usize) -> Result<Vec<f64>, AlgoError> {
        let prev = self.record.estimates.last().map(|e| e.theta.clone());
        let opts = FitOptions {
            starts: self.cfg.fit.starts,
            max_iter: self.cfg.fit.max_iter,
            seed: self.stream.estimator_seed(k as u64),
            warm_start: prev.clone(),
        };
        let est = match self.cfg.estimator {
            EstimatorKind::Lse => lse_fit(&self.data, &self.model, &opts)?,
            EstimatorKind::Mle => mle_fit(&self.data, &self.model, &opts)?,
        };
        let n = self.data.len();
        let step = match (&prev, est.converged) {
            (Some(p), false) => StepEstimate {
                k,
                n,
                theta: p.clone(),
                objective: est.objective,
                on_boundary: est.on_boundary,
                converged: false,
                reused_previous: true,
            },
            _ => StepEstimate {
                k,
                n,
                theta: est.theta_hat,
                objective: est.objective,
                on_boundary: est.on_boundary,
                converged: est.converged,
                reused_previous: false,
            },
        };
        let theta = step.theta.clone();
        self.record.estimates.push(step);
        self.record
            .diagnostics
            .push(self.info.diagnostics(k, n, self.cfg.reference_det));
        Ok(theta)
    }
}

/// Runs the p-step-ahead algorithm for `cfg.steps` iterations.
pub fn run_p_step(cfg: &RunConfig) -> Result<PathRecord, AlgoError> {
    let mut d = Driver::start(cfg, AlgorithmKind::PStep)?;
    let mut theta = d.fit(1)?;
    for k in 1..=cfg.steps {
        let sol = saturated::solve_saturated(&d.model, &theta, cfg.solver, &cfg.numeric)?;
        if !(sol.objective > 0.0) {
            d.record.aborted = Some(format!("saturated objective is zero at step {k}"));
            return Ok(d.record);
        }
        let pts = sol.points.points().to_vec();
        d.record.batches.push(Batch {
            k,
            points: pts.clone(),
            objective: sol.objective,
        });
        for x in pts {
            d.observe(x)?;
        }
        theta = d.fit(k + 1)?;
    }
    Ok(d.record)
}

/// Runs the adaptive Wynn rule: one sensitivity maximizer per step.
pub fn run_wynn(cfg: &RunConfig) -> Result<PathRecord, AlgoError> {
    let mut d = Driver::start(cfg, AlgorithmKind::Wynn)?;
    let mut theta = d.fit(1)?;
    for k in 1..=cfg.steps {
        let sens = match Sensitivity::from_points(
            d.data.xs.iter().map(|x| x.coords()),
            &theta,
            &d.model,
        ) {
            Ok(s) => s,
            Err(e) => {
                d.record.aborted = Some(format!("step {k}: {e}"));
                return Ok(d.record);
            }
        };
        let (x, v) = sens.maximize(cfg.wynn_grid_n, cfg.wynn_starts);
        d.record.batches.push(Batch {
            k,
            points: vec![x.clone()],
            objective: v,
        });
        d.observe(x)?;
        theta = d.fit(k + 1)?;
    }
    Ok(d.record)
}

pub fn run(cfg: &RunConfig, algorithm: AlgorithmKind) -> Result<PathRecord, AlgoError> {
    match algorithm {
        AlgorithmKind::PStep => run_p_step(cfg),
        AlgorithmKind::Wynn => run_wynn(cfg),
    }
}

/// Re-executes `cfg` with the algorithm recorded in `path`.
pub fn replay(path: &PathRecord, cfg: &RunConfig) -> Result<PathRecord, AlgoError> {
    path.check_integrity()?;
    run(cfg, path.algorithm)
}

/// Replays a record from its embedded configuration and demands equality.
pub fn verify_replay(path: &PathRecord) -> Result<(), AlgoError> {
    let again = replay(path, &path.config)?;
    if &again != path {
        let first = path
            .responses
            .iter()
            .zip(&again.responses)
            .position(|(a, b)| a.to_bits() != b.to_bits());
        return Err(AlgoError::Diverged(match first {
            Some(i) => format!("response {i} differs"),
            None => "estimates or diagnostics differ".into(),
        }));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{empirical_information, Design};
    use crate::models::{builtin, BoxRegion, ModelOptions};

    fn bx(lo: &[f64], hi: &[f64]) -> BoxRegion {
        BoxRegion::new(lo.to_vec(), hi.to_vec()).unwrap()
    }

    fn logit_cfg(steps: usize) -> RunConfig {
        let m = builtin(
            "logit",
            bx(&[-10.0, 0.1], &[10.0, 10.0]),
            bx(&[-4.0], &[4.0]),
            &ModelOptions::default(),
        )
        .unwrap();
        let mut c = RunConfig::new(
            &m,
            vec![0.0, 1.0],
            EstimatorKind::Mle,
            steps,
            ErrorModel::ExponentialFamily,
        );
        c.initial_points = vec![(-4.0).into(), 0.0.into(), 4.0.into()];
        c.fit.starts = 2;
        c.seed = 5;
        c
    }

    #[test]
    fn one_step_bookkeeping() {
        let r = run_p_step(&logit_cfg(1)).unwrap();
        assert_eq!(r.points.len(), 3 + 2);
        assert_eq!(r.estimates.len(), 2);
        r.check_integrity().unwrap();
        let mut c = logit_cfg(1);
        c.wynn_grid_n = 201;
        let w = run_wynn(&c).unwrap();
        assert_eq!(w.points.len(), 4);
        w.check_integrity().unwrap();
    }

    #[test]
    fn n_k_and_mixture_identity() {
        let r = run_p_step(&logit_cfg(12)).unwrap();
        let p = 2;
        let th = [0.0, 1.0];
        let model = r.config.model.build().unwrap();
        for (i, e) in r.estimates.iter().enumerate() {
            let k = i + 1;
            assert_eq!(e.n, 3 + (k - 1) * p);
        }
        for b in &r.batches {
            let nk = r.n_at(b.k);
            let nk1 = nk + p;
            let xi_k = Design::uniform(r.points[..nk].to_vec()).unwrap();
            let eta = Design::uniform(b.points.clone()).unwrap();
            let mix = xi_k.mixture(&eta, nk as f64 / nk1 as f64).unwrap();
            let direct =
                empirical_information(r.points[..nk1].iter().map(|x| x.coords()), &th, &model);
            let via_mix = crate::design::information_matrix(&mix, &th, &model).unwrap();
            assert!((direct.0 - via_mix.0).amax() < 1e-12);
            let sep = (b.points[0].0[0] - b.points[1].0[0]).abs();
            assert!(sep > 1e-8);
        }
    }

    #[test]
    fn noiseless_michaelis_menten_locks_on() {
        let m = builtin(
            "michaelis_menten",
            bx(&[0.1, 0.1], &[5.0, 5.0]),
            bx(&[0.0], &[10.0]),
            &ModelOptions::default(),
        )
        .unwrap();
        let mut c = RunConfig::new(
            &m,
            vec![1.0, 1.0],
            EstimatorKind::Lse,
            5,
            ErrorModel::Gaussian { sigma: 1e-8 },
        );
        c.initial_points = vec![1.0.into(), 5.0.into()];
        let r = run_p_step(&c).unwrap();
        for b in &r.batches {
            assert!(
                (b.points[0].0[0] - 5.0 / 6.0).abs() < 1e-3,
                "{:?}",
                b.points
            );
            assert!((b.points[1].0[0] - 10.0).abs() < 1e-3);
        }
    }

    #[test]
    fn replay_is_bitwise() {
        let r = run_p_step(&logit_cfg(8)).unwrap();
        verify_replay(&r).unwrap();
        let json = r.to_json();
        let back = PathRecord::from_json(&json).unwrap();
        assert_eq!(back, r);
        let mut c = logit_cfg(8);
        c.seed += 1;
        let other = replay(&r, &c).unwrap();
        assert_ne!(other.responses, r.responses);
    }

    #[test]
    fn damaged_records_are_rejected() {
        let r = run_p_step(&logit_cfg(3)).unwrap();
        let json = r.to_json();
        assert!(matches!(
            PathRecord::from_json(&json[..json.len() / 2]),
            Err(AlgoError::IntegrityError(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["version"] = 99.into();
        assert!(matches!(
            PathRecord::from_json(&v.to_string()),
            Err(AlgoError::VersionMismatch { found: 99, .. })
        ));
        let mut cut = r.clone();
        cut.points.pop();
        cut.responses.pop();
        assert!(matches!(
            cut.check_integrity(),
            Err(AlgoError::IntegrityError(_))
        ));
        let mut tampered = r.clone();
        tampered.responses[4] = 1.0 - tampered.responses[4];
        assert!(matches!(
            verify_replay(&tampered),
            Err(AlgoError::Diverged(_))
        ));
    }

    #[test]
    fn wynn_rejects_singular_start() {
        let mut c = logit_cfg(2);
        c.initial_points = vec![0.0.into()];
        assert!(matches!(run_wynn(&c), Err(AlgoError::SingularInitial(_))));
    }

    #[test]
    fn config_errors_name_fields() {
        let mut c = logit_cfg(2);
        c.steps = 0;
        match c.validate() {
            Err(AlgoError::Config { path, .. }) => assert_eq!(path, "steps"),
            other => panic!("{other:?}"),
        }
        let mut c = logit_cfg(2);
        c.initial_points.push(9.0.into());
        match c.validate() {
            Err(AlgoError::Config { path, .. }) => assert_eq!(path, "initial_points[3]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn p_equals_one_matches_wynn() {
        let m = builtin(
            "exp_decay1",
            bx(&[0.2], &[5.0]),
            bx(&[0.05], &[10.0]),
            &ModelOptions::default(),
        )
        .unwrap();
        let mut c = RunConfig::new(
            &m,
            vec![1.3],
            EstimatorKind::Lse,
            15,
            ErrorModel::Gaussian { sigma: 0.05 },
        );
        c.initial_points = vec![2.0.into()];
        c.solver = SolverChoice::Numeric;
        c.numeric = NumericOptions {
            starts: 4,
            grid_n: 2001,
            tol: 1e-6,
        };
        c.wynn_grid_n = 2001;
        c.wynn_starts = 4;
        c.fit.starts = 3;
        let a = run_p_step(&c).unwrap();
        let b = run_wynn(&c).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        // a smooth maximum pins its argmax only to about sqrt(eps)
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((x.0[0] - y.0[0]).abs() < 1e-6, "{x:?} vs {y:?}");
        }
        for (e, f) in a.estimates.iter().zip(&b.estimates) {
            assert!((e.theta[0] - f.theta[0]).abs() < 1e-5);
        }
    }
}
