//! Response sampling and box-constrained least-squares / maximum-likelihood
//! estimation.

use crate::design::{add_outer, symmetrize_lower, DesignPoint};
use crate::linalg;
use crate::models::{GlmBlock, ModelError, ModelSpec, ResponseKind};
use crate::optim::{self, NelderMeadOptions};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{xs} design points but {ys} responses")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("model {0} has no exponential-family block")]
    MissingGlmBlock(String),
    #[error("gaussian sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorModel {
    /// `y = μ(x, θ̄) + σ ε`, `ε ~ N(0, 1)`.
    Gaussian { sigma: f64 },
    /// Draw from the model's exponential family at mean `G(f(x)ᵀθ̄)`.
    ExponentialFamily,
}

impl ErrorModel {
    pub fn validate(&self) -> Result<(), EstimError> {
        match *self {
            ErrorModel::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(EstimError::InvalidSigma(sigma))
            }
            _ => Ok(()),
        }
    }
}

/// One response at `x` under `θ̄`.
pub fn sample_response<R: Rng + ?Sized>(
    model: &ModelSpec,
    x: &DesignPoint,
    theta_true: &[f64],
    err: &ErrorModel,
    rng: &mut R,
) -> Result<f64, EstimError> {
    err.validate()?;
    match *err {
        ErrorModel::Gaussian { sigma } => {
            let e: f64 = rng.sample(StandardNormal);
            Ok(model.mean(x.coords(), theta_true) + sigma * e)
        }
        ErrorModel::ExponentialFamily => {
            let glm = model
                .glm_block()
                .ok_or_else(|| EstimError::MissingGlmBlock(model.name().into()))?;
            let mean = glm.mean(model.linear_predictor(x.coords(), theta_true));
            match glm.response {
                ResponseKind::Bernoulli => Ok(if rng.random_bool(mean.clamp(0.0, 1.0)) {
                    1.0
                } else {
                    0.0
                }),
                ResponseKind::Poisson => {
                    if mean <= 0.0 {
                        return Ok(0.0);
                    }
                    let d = Poisson::new(mean).map_err(|e| EstimError::Sampling(e.to_string()))?;
                    Ok(d.sample(rng))
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub xs: Vec<DesignPoint>,
    pub ys: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<DesignPoint>, ys: Vec<f64>) -> Result<Self, EstimError> {
        if xs.len() != ys.len() {
            return Err(EstimError::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        Ok(Dataset { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn push(&mut self, x: DesignPoint, y: f64) {
        self.xs.push(x);
        self.ys.push(y);
    }

    fn check(&self, model: &ModelSpec) -> Result<(), EstimError> {
        if self.is_empty() {
            return Err(EstimError::EmptyDataset);
        }
        if self.xs.len() != self.ys.len() {
            return Err(EstimError::LengthMismatch {
                xs: self.xs.len(),
                ys: self.ys.len(),
            });
        }
        for x in &self.xs {
            model.check_point(x.coords())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub theta_hat: Vec<f64>,
    /// Residual sum of squares (LSE) or log-likelihood (MLE).
    pub objective: f64,
    pub on_boundary: bool,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Latin-hypercube starts in addition to the warm start.
    pub starts: usize,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 16,
            max_iter: 200,
            seed: 0,
            warm_start: None,
        }
    }
}

const BOUNDARY_TOL: f64 = 1e-9;

fn start_points(model: &ModelSpec, opts: &FitOptions) -> Vec<Vec<f64>> {
    let tb = model.theta_box();
    let mut starts = Vec::with_capacity(opts.starts + 1);
    if let Some(w) = &opts.warm_start {
        let mut w = w.clone();
        tb.clamp(&mut w);
        starts.push(w);
    }
    if opts.starts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        starts.extend(optim::latin_hypercube(opts.starts, tb, &mut rng));
    }
    if starts.is_empty() {
        starts.push(tb.center());
    }
    starts
}

/// Coordinates held at a bound because the descent direction points out of
/// the box. `dir` is the unconstrained ascent direction of the objective
/// being maximized.
fn active_set(theta: &[f64], dir: &[f64], model: &ModelSpec) -> Vec<bool> {
    let tb = model.theta_box();
    theta
        .iter()
        .zip(dir)
        .enumerate()
        .map(|(j, (t, g))| {
            let tol = 1e-12 * (1.0 + tb.width(j));
            (*t <= tb.lower[j] + tol && *g < 0.0) || (*t >= tb.upper[j] - tol && *g > 0.0)
        })
        .collect()
}

/// Solves the free block of `a δ = b`; fixed coordinates get `δ = 0`.
fn solve_free(a: &DMatrix<f64>, b: &[f64], fixed: &[bool]) -> Option<Vec<f64>> {
    let free: Vec<usize> = (0..b.len()).filter(|&j| !fixed[j]).collect();
    let mut out = vec![0.0; b.len()];
    if free.is_empty() {
        return Some(out);
    }
    let sub = DMatrix::from_fn(free.len(), free.len(), |i, j| a[(free[i], free[j])]);
    let rhs: Vec<f64> = free.iter().map(|&j| b[j]).collect();
    let d = linalg::solve(&sub, &rhs)?;
    for (k, &j) in free.iter().enumerate() {
        out[j] = d[k];
    }
    Some(out)
}

fn rss(data: &Dataset, model: &ModelSpec, theta: &[f64]) -> f64 {
    data.xs
        .iter()
        .zip(&data.ys)
        .map(|(x, y)| (y - model.mean(x.coords(), theta)).powi(2))
        .sum()
}

/// Least-squares estimate over the parameter box.
pub fn lse_fit(
    data: &Dataset,
    model: &ModelSpec,
    opts: &FitOptions,
) -> Result<Estimate, EstimError> {
    data.check(model)?;
    let mut best: Option<Estimate> = None;
    for s in start_points(model, opts) {
        let e = lm_from(data, model, s, opts.max_iter);
        if best.as_ref().map_or(true, |b| e.objective < b.objective) {
            best = Some(e);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Projected Levenberg–Marquardt from one start.
fn lm_from(data: &Dataset, model: &ModelSpec, mut theta: Vec<f64>, max_iter: usize) -> Estimate {
    let p = model.p();
    let tb = model.theta_box();
    let mut s = rss(data, model, &theta);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut grad = vec![0.0; p];
    let mut jtj = DMatrix::zeros(p, p);
    let mut iter = 0;
    while iter < max_iter {
        if s <= 1e-300 {
            converged = true;
            break;
        }
        jtj.fill(0.0);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (x, y) in data.xs.iter().zip(&data.ys) {
            let mut j = vec![0.0; p];
            model.mean_gradient_into(x.coords(), &theta, &mut j);
            let r = y - model.mean(x.coords(), &theta);
            add_outer(&mut jtj, &j, 1.0);
            for (g, jv) in grad.iter_mut().zip(&j) {
                *g += r * jv;
            }
        }
        symmetrize_lower(&mut jtj);
        let fixed = active_set(&theta, &grad, model);
        let gmax = grad
            .iter()
            .zip(&fixed)
            .filter(|(_, f)| !**f)
            .map(|(g, _)| g.abs())
            .fold(0.0, f64::max);
        if gmax <= 1e-13 * (1.0 + s) {
            converged = true;
            break;
        }
        let scale = (0..p).map(|j| jtj[(j, j)]).fold(0.0, f64::max).max(1e-300);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for j in 0..p {
                a[(j, j)] += lambda * (jtj[(j, j)] + 1e-12 * scale);
            }
            let Some(delta) = solve_free(&a, &grad, &fixed) else {
                lambda *= 4.0;
                continue;
            };
            let mut cand: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
            tb.clamp(&mut cand);
            let sc = rss(data, model, &cand);
            if sc < s {
                let step = cand
                    .iter()
                    .zip(&theta)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let gain = s - sc;
                theta = cand;
                s = sc;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                let tmax = theta.iter().map(|t| t.abs()).fold(0.0, f64::max);
                if gain <= 1e-15 * s && step <= 1e-10 * (1.0 + tmax) {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        iter += 1;
        if !accepted {
            // no descent at any damping: numerically stationary
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    if !converged {
        // Nelder–Mead fallback when damping never settled
        let step: Vec<f64> = (0..p).map(|j| 0.05 * tb.width(j)).collect();
        let m = optim::nelder_mead(
            |t| rss(data, model, t),
            &theta,
            &step,
            tb,
            &NelderMeadOptions::default(),
        );
        if m.value < s {
            theta = m.x;
            s = m.value;
        }
        converged = m.converged;
    }
    Estimate {
        on_boundary: tb.on_boundary(&theta, BOUNDARY_TOL),
        theta_hat: theta,
        objective: s,
        converged,
    }
}

fn glm_of(model: &ModelSpec) -> Result<GlmBlock, EstimError> {
    model
        .glm_block()
        .ok_or_else(|| EstimError::MissingGlmBlock(model.name().into()))
}

/// Log-likelihood `Σ τᵢ(θ) yᵢ − b(τᵢ(θ))`.
pub fn log_likelihood(data: &Dataset, model: &ModelSpec, theta: &[f64]) -> Result<f64, EstimError> {
    let glm = glm_of(model)?;
    Ok(loglik(data, model, &glm, theta))
}

fn loglik(data: &Dataset, model: &ModelSpec, glm: &GlmBlock, theta: &[f64]) -> f64 {
    data.xs
        .iter()
        .zip(&data.ys)
        .map(|(x, y)| glm.loglik(model.linear_predictor(x.coords(), theta), *y))
        .sum()
}

/// Analytic gradient of the log-likelihood.
pub fn score(data: &Dataset, model: &ModelSpec, theta: &[f64]) -> Result<Vec<f64>, EstimError> {
    let glm = glm_of(model)?;
    let p = model.p();
    let mut g = vec![0.0; p];
    let mut f = vec![0.0; p];
    for (x, y) in data.xs.iter().zip(&data.ys) {
        model.regressor_into(x.coords(), &mut f);
        let s = glm.score(model.linear_predictor(x.coords(), theta), *y);
        for (gj, fj) in g.iter_mut().zip(&f) {
            *gj += s * fj;
        }
    }
    Ok(g)
}

/// Maximum-likelihood estimate over the parameter box.
pub fn mle_fit(
    data: &Dataset,
    model: &ModelSpec,
    opts: &FitOptions,
) -> Result<Estimate, EstimError> {
    let glm = glm_of(model)?;
    data.check(model)?;
    let mut best: Option<Estimate> = None;
    for s in start_points(model, opts) {
        let e = scoring_from(data, model, &glm, s, opts.max_iter);
        if best.as_ref().map_or(true, |b| e.objective > b.objective) {
            best = Some(e);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Projected Fisher scoring with Armijo backtracking.
fn scoring_from(
    data: &Dataset,
    model: &ModelSpec,
    glm: &GlmBlock,
    mut theta: Vec<f64>,
    max_iter: usize,
) -> Estimate {
    let p = model.p();
    let tb = model.theta_box();
    let mut l = loglik(data, model, glm, &theta);
    let mut converged = false;
    let mut info = DMatrix::zeros(p, p);
    let mut g = vec![0.0; p];
    let mut f = vec![0.0; p];
    for _ in 0..max_iter {
        info.fill(0.0);
        g.iter_mut().for_each(|v| *v = 0.0);
        for (x, y) in data.xs.iter().zip(&data.ys) {
            model.regressor_into(x.coords(), &mut f);
            let u = model.linear_predictor(x.coords(), &theta);
            add_outer(&mut info, &f, glm.weight(u));
            let s = glm.score(u, *y);
            for (gj, fj) in g.iter_mut().zip(&f) {
                *gj += s * fj;
            }
        }
        symmetrize_lower(&mut info);
        let fixed = active_set(&theta, &g, model);
        let gmax = g
            .iter()
            .zip(&fixed)
            .filter(|(_, fx)| !**fx)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max);
        if gmax <= 1e-13 * (1.0 + l.abs()) {
            converged = true;
            break;
        }
        let scale = (0..p).map(|j| info[(j, j)]).fold(0.0, f64::max).max(1e-300);
        let mut a = info.clone();
        for j in 0..p {
            a[(j, j)] += 1e-10 * scale;
        }
        let dir = match solve_free(&a, &g, &fixed) {
            Some(d) if d.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() > 0.0 => d,
            _ => g.clone(),
        };
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-14 {
            let mut cand: Vec<f64> = theta.iter().zip(&dir).map(|(th, d)| th + t * d).collect();
            tb.clamp(&mut cand);
            let lc = loglik(data, model, glm, &cand);
            let pred: f64 = cand
                .iter()
                .zip(&theta)
                .zip(&g)
                .map(|((c, th), gj)| (c - th) * gj)
                .sum();
            if lc.is_finite() && lc >= l + 1e-4 * pred {
                let step = cand
                    .iter()
                    .zip(&theta)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let gain = lc - l;
                theta = cand;
                l = lc;
                moved = true;
                let tmax = theta.iter().map(|v| v.abs()).fold(0.0, f64::max);
                if step <= 1e-12 * (1.0 + tmax)
                    || (gain <= 1e-15 * l.abs() && step <= 1e-9 * (1.0 + tmax))
                {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !moved {
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Estimate {
        on_boundary: tb.on_boundary(&theta, BOUNDARY_TOL),
        theta_hat: theta,
        objective: l,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin, BoxRegion, ModelOptions};
    use crate::rng::SeededStream;
    use proptest::prelude::*;

    fn bx(lo: &[f64], hi: &[f64]) -> BoxRegion {
        BoxRegion::new(lo.to_vec(), hi.to_vec()).unwrap()
    }

    fn mm(hi: f64) -> ModelSpec {
        builtin(
            "michaelis_menten",
            bx(&[0.1, 0.1], &[hi, hi]),
            bx(&[0.0], &[10.0]),
            &ModelOptions::default(),
        )
        .unwrap()
    }

    fn logit() -> ModelSpec {
        builtin(
            "logit",
            bx(&[-10.0, 0.1], &[10.0, 10.0]),
            bx(&[-4.0], &[4.0]),
            &ModelOptions::default(),
        )
        .unwrap()
    }

    fn pts(xs: &[f64]) -> Vec<DesignPoint> {
        xs.iter().map(|&x| DesignPoint(vec![x])).collect()
    }

    fn sample_many(model: &ModelSpec, x: &[f64], th: &[f64], n: u64) -> Vec<f64> {
        let s = SeededStream::new(11, 0);
        (0..n)
            .map(|i| {
                sample_response(
                    model,
                    &DesignPoint(x.to_vec()),
                    th,
                    &ErrorModel::ExponentialFamily,
                    &mut s.observation_rng(i),
                )
                .unwrap()
            })
            .collect()
    }

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (
            m,
            v.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0),
        )
    }

    #[test]
    fn bernoulli_moments() {
        let m = logit();
        let v = sample_many(&m, &[0.0], &[0.0, 1.0], 100_000);
        let (mean, var) = mean_var(&v);
        assert!((mean - 0.5).abs() < 0.01);
        // three standard errors of the sample variance
        assert!((var - 0.25).abs() < 3.0 * (0.0625f64 / 1e5).sqrt() + 1e-3);
    }

    #[test]
    fn poisson_moments() {
        let m = builtin(
            "poisson2",
            bx(&[-1.0, -1.0, -1.0], &[1.0, 0.0, 0.0]),
            bx(&[0.0, 0.0], &[2.0, 2.0]),
            &ModelOptions::default(),
        )
        .unwrap();
        let v = sample_many(&m, &[0.0, 0.0], &[0.0, 0.0, 0.0], 100_000);
        let (mean, var) = mean_var(&v);
        assert!((mean - 1.0).abs() < 0.02);
        assert!((var - 1.0).abs() < 3.0 * (3.0f64 / 1e5).sqrt());
    }

    #[test]
    fn gaussian_sampler() {
        let m = mm(5.0);
        let x = DesignPoint(vec![2.0]);
        assert!(matches!(
            sample_response(
                &m,
                &x,
                &[1.0, 1.0],
                &ErrorModel::Gaussian { sigma: 0.0 },
                &mut ChaCha8Rng::seed_from_u64(0)
            ),
            Err(EstimError::InvalidSigma(_))
        ));
        let y = sample_response(
            &m,
            &x,
            &[1.0, 1.0],
            &ErrorModel::Gaussian { sigma: 1e-12 },
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert!((y - 2.0 / 3.0).abs() < 1e-10);
        assert!(matches!(
            sample_response(
                &m,
                &x,
                &[1.0, 1.0],
                &ErrorModel::ExponentialFamily,
                &mut ChaCha8Rng::seed_from_u64(0)
            ),
            Err(EstimError::MissingGlmBlock(_))
        ));
    }

    #[test]
    fn noiseless_michaelis_menten_inversion() {
        let m = mm(5.0);
        let xs = pts(&[5.0 / 6.0, 10.0]);
        let ys: Vec<f64> = xs.iter().map(|x| m.mean(x.coords(), &[1.0, 1.0])).collect();
        let e = lse_fit(&Dataset::new(xs, ys).unwrap(), &m, &FitOptions::default()).unwrap();
        assert!(e.converged);
        assert!(
            (e.theta_hat[0] - 1.0).abs() < 1e-6 && (e.theta_hat[1] - 1.0).abs() < 1e-6,
            "{:?}",
            e.theta_hat
        );
    }

    #[test]
    fn underdetermined_exp_decay() {
        let m = builtin(
            "exp_decay",
            bx(&[0.1, 0.1], &[5.0, 5.0]),
            bx(&[0.0], &[10.0]),
            &ModelOptions::default(),
        )
        .unwrap();
        let d = Dataset::new(pts(&[1.0]), vec![0.5]).unwrap();
        let e = lse_fit(&d, &m, &FitOptions::default()).unwrap();
        assert!(e.converged);
        assert!(e.objective < 1e-20, "{}", e.objective);
        assert!(matches!(
            lse_fit(&Dataset::default(), &m, &FitOptions::default()),
            Err(EstimError::EmptyDataset)
        ));
    }

    #[test]
    fn gaussian_calibration() {
        let m = mm(10.0);
        let th = [2.0, 3.0];
        let mut hits = 0;
        for seed in 0..100 {
            let s = SeededStream::new(seed, 0);
            let xs: Vec<DesignPoint> = (0..200)
                .map(|i| DesignPoint(vec![if i % 2 == 0 { 0.8 } else { 10.0 }]))
                .collect();
            let ys: Vec<f64> = xs
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    sample_response(
                        &m,
                        x,
                        &th,
                        &ErrorModel::Gaussian { sigma: 0.1 },
                        &mut s.observation_rng(i as u64),
                    )
                    .unwrap()
                })
                .collect();
            let e = lse_fit(
                &Dataset::new(xs, ys).unwrap(),
                &m,
                &FitOptions {
                    starts: 4,
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            let err = ((e.theta_hat[0] - 2.0).powi(2) + (e.theta_hat[1] - 3.0).powi(2)).sqrt();
            if err < 0.2 {
                hits += 1;
            }
        }
        // N(0, σ²M⁻¹/n) puts 0.863 of its mass inside radius 0.2 for this
        // design; allow three binomial standard errors
        assert!(hits >= 76, "{hits}");
    }

    #[test]
    fn separation_hits_the_boundary() {
        let m = logit();
        let d = Dataset::new(pts(&[-1.0, 1.0]), vec![0.0, 0.0]).unwrap();
        let e = mle_fit(&d, &m, &FitOptions::default()).unwrap();
        assert!(e.on_boundary, "{:?}", e.theta_hat);
    }

    #[test]
    fn canonical_link_tau_is_linear_predictor() {
        let g = logit().glm_block().unwrap();
        for u in [-7.0, -1.0, 0.0, 0.3, 5.0] {
            assert!((g.tau(u) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_model_matches_normal_equations() {
        let m = builtin(
            "linear",
            bx(&[-10.0, -10.0], &[10.0, 10.0]),
            bx(&[-1.0], &[1.0]),
            &ModelOptions::default(),
        )
        .unwrap();
        let xs: Vec<f64> = (0..25).map(|i| -1.0 + i as f64 / 12.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 0.3 - 1.7 * x + 0.1 * (7.0 * x).sin())
            .collect();
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let a = (sy - b * sx) / n;
        let e = lse_fit(
            &Dataset::new(pts(&xs), ys).unwrap(),
            &m,
            &FitOptions::default(),
        )
        .unwrap();
        assert!(
            (e.theta_hat[0] - a).abs() < 1e-9 && (e.theta_hat[1] - b).abs() < 1e-9,
            "{:?} vs {a} {b}",
            e.theta_hat
        );
    }

    #[test]
    fn fits_are_deterministic() {
        let m = logit();
        let xs = pts(&[-4.0, 0.0, 4.0, -1.5, 1.5, 0.5]);
        let d = Dataset::new(xs, vec![0.0, 1.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let o = FitOptions {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(mle_fit(&d, &m, &o).unwrap(), mle_fit(&d, &m, &o).unwrap());
        assert_eq!(lse_fit(&d, &m, &o).unwrap(), lse_fit(&d, &m, &o).unwrap());
    }

    fn logit_data(seed: u64, n: usize) -> Dataset {
        let m = logit();
        let s = SeededStream::new(seed, 0);
        let xs: Vec<DesignPoint> = (0..n)
            .map(|i| DesignPoint(vec![-4.0 + 8.0 * (i % 9) as f64 / 8.0]))
            .collect();
        let ys = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                sample_response(
                    &m,
                    x,
                    &[0.5, 1.2],
                    &ErrorModel::ExponentialFamily,
                    &mut s.observation_rng(i as u64),
                )
                .unwrap()
            })
            .collect();
        Dataset::new(xs, ys).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mle_beats_truth(seed in 0u64..1000, n in 3usize..60) {
            let m = logit();
            let d = logit_data(seed, n);
            let e = mle_fit(&d, &m, &FitOptions { starts: 4, seed, ..Default::default() }).unwrap();
            let lt = log_likelihood(&d, &m, &[0.5, 1.2]).unwrap();
            prop_assert!(e.objective >= lt - 1e-9 * lt.abs());
        }

        #[test]
        fn lse_beats_truth(seed in 0u64..1000, n in 2usize..40) {
            let m = mm(5.0);
            let s = SeededStream::new(seed, 1);
            let xs: Vec<DesignPoint> = (0..n).map(|i| DesignPoint(vec![0.5 + (i % 5) as f64 * 2.0])).collect();
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| sample_response(&m, x, &[1.0, 1.0], &ErrorModel::Gaussian { sigma: 0.3 }, &mut s.observation_rng(i as u64)).unwrap()).collect();
            let d = Dataset::new(xs, ys).unwrap();
            let e = lse_fit(&d, &m, &FitOptions { starts: 4, seed, ..Default::default() }).unwrap();
            let st = rss(&d, &m, &[1.0, 1.0]);
            prop_assert!(e.objective <= st + 1e-9 * st);
        }

        #[test]
        fn score_matches_finite_differences(seed in 0u64..1000, t1 in -3.0f64..3.0, t2 in 0.3f64..3.0, link in 0usize..4) {
            let name = ["logit", "cloglog", "probit", "skewed_logit"][link];
            let m = builtin(name, bx(&[-10.0, 0.1], &[10.0, 10.0]), bx(&[-4.0], &[4.0]), &ModelOptions::default()).unwrap();
            let d = logit_data(seed, 30);
            let th = [t1, t2];
            let g = score(&d, &m, &th).unwrap();
            for j in 0..2 {
                let h = 1e-6 * (1.0 + th[j].abs());
                let (mut a, mut b) = (th, th);
                a[j] += h;
                b[j] -= h;
                let fd = (log_likelihood(&d, &m, &a).unwrap() - log_likelihood(&d, &m, &b).unwrap()) / (2.0 * h);
                prop_assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0), "{} {} {}", name, fd, g[j]);
            }
        }
    }
}
