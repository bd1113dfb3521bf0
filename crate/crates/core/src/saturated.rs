//! Locally D-optimal saturated designs: maximize `det[f_θ(z₁), …, f_θ(z_p)]²`
//! over `X^p`.

use crate::design::{self, Design, DesignError, DesignPoint, SaturatedDesign};
use crate::linalg;
use crate::models::{
    canonical_transform_binary, canonical_transform_poisson, BoxRegion, Family, GlmBlock, Link,
    ModelError, ModelSpec, PoissonCase,
};
use crate::optim::{self, NelderMeadOptions};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaturatedError {
    #[error("no interior stationary point found for the two-point problem")]
    NoInteriorRoot,
    #[error("no closed form available for {0}")]
    NotAvailable(String),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("two-point problem needs alpha < beta, got [{0}, {1}]")]
    EmptyInterval(f64, f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedForm,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    Unique,
    NonUnique,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturatedSolution {
    pub points: SaturatedDesign,
    /// `det[f_θ(z₁), …, f_θ(z_p)]²`.
    pub objective: f64,
    pub method: SolveMethod,
    pub uniqueness: Uniqueness,
    /// Which branch of the closed form was taken, when applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
}

/// Which solver a caller prefers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    #[default]
    ClosedFormPreferred,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    pub starts: usize,
    pub grid_n: usize,
    pub tol: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            starts: 8,
            grid_n: 21,
            tol: 1e-6,
        }
    }
}

/// `det[f_θ(z₁), …, f_θ(z_p)]²` for `p` points.
pub fn objective(model: &ModelSpec, theta: &[f64], points: &[DesignPoint]) -> f64 {
    let fs: Vec<Vec<f64>> = points
        .iter()
        .map(|x| model.f_theta(x.coords(), theta))
        .collect();
    let cols: Vec<&[f64]> = fs.iter().map(|v| v.as_slice()).collect();
    linalg::det_columns(&cols).powi(2)
}

/// Maximize `h(z) = ln φ(z₁) + ln φ(z₂) + ln(z₂ − z₁)` over `α ≤ z₁ < z₂ ≤ β`.
pub struct TwoPointProblem<'a> {
    pub alpha: f64,
    pub beta: f64,
    pub lnphi: &'a dyn Fn(f64) -> f64,
    pub dlnphi: &'a dyn Fn(f64) -> f64,
}

impl TwoPointProblem<'_> {
    pub fn h(&self, z1: f64, z2: f64) -> f64 {
        (self.lnphi)(z1) + (self.lnphi)(z2) + (z2 - z1).ln()
    }

    /// `∂h/∂z₁`.
    pub fn h1(&self, z1: f64, z2: f64) -> f64 {
        (self.dlnphi)(z1) - 1.0 / (z2 - z1)
    }

    /// `∂h/∂z₂`.
    pub fn h2(&self, z1: f64, z2: f64) -> f64 {
        (self.dlnphi)(z2) + 1.0 / (z2 - z1)
    }

    fn d2lnphi(&self, u: f64) -> f64 {
        let h = 1e-5 * (1.0 + u.abs());
        ((self.dlnphi)(u + h) - (self.dlnphi)(u - h)) / (2.0 * h)
    }

    /// Mode of `ln φ`, by bisection on its derivative.
    fn mode(&self) -> Option<f64> {
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut k = 0;
        while (self.dlnphi)(lo) <= 0.0 {
            lo *= 2.0;
            k += 1;
            if k > 8 {
                return None;
            }
        }
        k = 0;
        while (self.dlnphi)(hi) >= 0.0 {
            hi *= 2.0;
            k += 1;
            if k > 8 {
                return None;
            }
        }
        Some(bisect(|u| (self.dlnphi)(u), lo, hi, 1e-12))
    }
}

/// Root of a function decreasing across `[lo, hi]` (positive at `lo`).
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Stationary point `z**` of `h` on `{z₁ < z₂}` by damped Newton.
pub fn solve_unbounded_two_point(problem: &TwoPointProblem) -> Result<(f64, f64), SaturatedError> {
    let center = problem.mode().unwrap_or(0.0);
    for start in 0..100 {
        // spreads 1, 2, 0.5, 3, 0.33, ... around the mode
        let k = (start / 2 + 1) as f64;
        let spread = if start % 2 == 0 { k } else { 1.0 / (k + 1.0) };
        let shift = if start % 4 < 2 { 0.0 } else { 0.5 * k };
        if let Some(z) = newton_two_point(problem, center + shift - spread, center + shift + spread)
        {
            return Ok(z);
        }
    }
    Err(SaturatedError::NoInteriorRoot)
}

fn newton_two_point(pr: &TwoPointProblem, mut z1: f64, mut z2: f64) -> Option<(f64, f64)> {
    for _ in 0..200 {
        let (g1, g2) = (pr.h1(z1, z2), pr.h2(z1, z2));
        if !(g1.is_finite() && g2.is_finite()) {
            return None;
        }
        if g1.abs().max(g2.abs()) < 1e-10 {
            return Some((z1, z2));
        }
        let q = 1.0 / (z2 - z1).powi(2);
        let (a, b, c) = (pr.d2lnphi(z1) - q, q, pr.d2lnphi(z2) - q);
        let det = a * c - b * b;
        // Newton for a maximum needs a negative-definite Hessian
        let (d1, d2) = if a < 0.0 && det > 0.0 {
            (-(c * g1 - b * g2) / det, -(a * g2 - b * g1) / det)
        } else {
            (g1, g2)
        };
        let h0 = pr.h(z1, z2);
        let mut t = 1.0;
        loop {
            let (n1, n2) = (z1 + t * d1, z2 + t * d2);
            if n2 > n1 && pr.h(n1, n2) >= h0 - 1e-14 * h0.abs() {
                z1 = n1;
                z2 = n2;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return None;
            }
        }
    }
    None
}

/// Solution of the two-point problem on `[α, β]` with the branch taken
/// (1 to 4).
pub fn solve_two_point_bounded(
    problem: &TwoPointProblem,
) -> Result<(f64, f64, u8), SaturatedError> {
    let (alpha, beta) = (problem.alpha, problem.beta);
    if !(alpha < beta) {
        return Err(SaturatedError::EmptyInterval(alpha, beta));
    }
    let (s1, s2) = solve_unbounded_two_point(problem)?;
    let low_ok = alpha <= s1;
    let high_ok = beta >= s2;
    Ok(match (low_ok, high_ok) {
        (true, true) => (s1, s2, 1),
        (true, false) => {
            if problem.h1(alpha, beta) <= 0.0 {
                (alpha, beta, 2)
            } else {
                let u = bisect(|u| problem.h1(u, beta), alpha, beta - 1e-12, 1e-12);
                (u, beta, 2)
            }
        }
        (false, true) => {
            if problem.h2(alpha, beta) >= 0.0 {
                (alpha, beta, 3)
            } else {
                // h2(α, ·) decreases from +inf at α
                let v = bisect(|v| problem.h2(alpha, v), alpha + 1e-12, beta, 1e-12);
                (alpha, v, 3)
            }
        }
        (false, false) => (alpha, beta, 4),
    })
}

fn points_1d(xs: &[f64]) -> Vec<DesignPoint> {
    xs.iter().map(|&x| DesignPoint(vec![x])).collect()
}

fn finish(
    model: &ModelSpec,
    theta: &[f64],
    points: Vec<DesignPoint>,
    method: SolveMethod,
    uniqueness: Uniqueness,
    case: Option<String>,
) -> Result<SaturatedSolution, SaturatedError> {
    let points = SaturatedDesign::new(points)?;
    let objective = objective(model, theta, points.points());
    Ok(SaturatedSolution {
        points,
        objective,
        method,
        uniqueness,
        case,
    })
}

/// Closed-form saturated optimum for families that have one.
pub fn solve_saturated_closed_form(
    model: &ModelSpec,
    theta: &[f64],
) -> Result<SaturatedSolution, SaturatedError> {
    model.check_theta(theta)?;
    let xb = model.x_box();
    let cf = SolveMethod::ClosedForm;
    match model.family() {
        Family::MichaelisMenten => {
            let (a, b) = (xb.lower[0], xb.upper[0]);
            let x1 = (theta[1] * b / (2.0 * theta[1] + b)).max(a);
            finish(
                model,
                theta,
                points_1d(&[x1, b]),
                cf,
                Uniqueness::Unique,
                None,
            )
        }
        Family::ExpDecay => {
            let (a, b) = (xb.lower[0], xb.upper[0]);
            let x2 = (a + 1.0 / theta[1]).min(b);
            finish(
                model,
                theta,
                points_1d(&[a, x2]),
                cf,
                Uniqueness::Unique,
                None,
            )
        }
        Family::ExpDecay1 => {
            let (a, b) = (xb.lower[0], xb.upper[0]);
            let x = (1.0 / theta[0]).clamp(a, b);
            finish(model, theta, points_1d(&[x]), cf, Uniqueness::Unique, None)
        }
        Family::Linear { degree } => {
            let (a, b) = (xb.lower[0], xb.upper[0]);
            match degree {
                0 => finish(
                    model,
                    theta,
                    points_1d(&[a]),
                    cf,
                    Uniqueness::NonUnique,
                    None,
                ),
                1 => finish(
                    model,
                    theta,
                    points_1d(&[a, b]),
                    cf,
                    Uniqueness::Unique,
                    None,
                ),
                _ => finish(
                    model,
                    theta,
                    points_1d(&[a, 0.5 * (a + b), b]),
                    cf,
                    Uniqueness::Unique,
                    None,
                ),
            }
        }
        Family::Binary { link: Link::Probit } => {
            Err(SaturatedError::NotAvailable(model.name().to_string()))
        }
        Family::Binary { link } => {
            let t = canonical_transform_binary(model, theta)?;
            let glm = GlmBlock::bernoulli(link);
            let lnphi = |u: f64| glm.ln_phi(u);
            let dlnphi = |u: f64| glm.d_ln_phi(u);
            let pr = TwoPointProblem {
                alpha: t.alpha,
                beta: t.beta,
                lnphi: &lnphi,
                dlnphi: &dlnphi,
            };
            let (z1, z2, case) = solve_two_point_bounded(&pr)?;
            // snap boundary-active coordinates so they map exactly onto a or b
            let back = |z: f64| {
                let x = t.inverse(z);
                if z == t.alpha || z == t.beta {
                    let (a, b) = (xb.lower[0], xb.upper[0]);
                    if (x - a).abs() < (x - b).abs() {
                        a
                    } else {
                        b
                    }
                } else {
                    x.clamp(xb.lower[0], xb.upper[0])
                }
            };
            finish(
                model,
                theta,
                points_1d(&[back(z1), back(z2)]),
                cf,
                Uniqueness::Unique,
                Some(case.to_string()),
            )
        }
        Family::Poisson2 => {
            let t = canonical_transform_poisson(theta, xb)?;
            let [c1, c2] = t.c;
            let (zs, uniq) = match t.case {
                PoissonCase::BothNegative => {
                    let (s1, s2) = (c1.min(2.0), c2.min(2.0));
                    ([[0.0, 0.0], [s1, 0.0], [0.0, s2]], Uniqueness::Unique)
                }
                PoissonCase::OneZero => {
                    let s1 = c1.min(2.0);
                    ([[0.0, 0.0], [s1, 0.0], [0.0, c2]], Uniqueness::NonUnique)
                }
                PoissonCase::BothZero => {
                    ([[0.0, 0.0], [c1, 0.0], [0.0, c2]], Uniqueness::NonUnique)
                }
            };
            let pts = zs
                .iter()
                .map(|z| {
                    let mut x = t.inverse(z).to_vec();
                    xb.clamp(&mut x);
                    DesignPoint(x)
                })
                .collect();
            finish(
                model,
                theta,
                pts,
                cf,
                uniq,
                Some(t.case.label().to_string()),
            )
        }
    }
}

/// Grid enumeration of point sets followed by Nelder–Mead polish.
pub fn solve_saturated_numeric(
    model: &ModelSpec,
    theta: &[f64],
    opts: &NumericOptions,
) -> Result<SaturatedSolution, SaturatedError> {
    if opts.starts == 0 {
        return Err(SaturatedError::InvalidOptions(
            "starts must be at least 1".into(),
        ));
    }
    if opts.grid_n < 2 {
        return Err(SaturatedError::InvalidOptions(
            "grid_n must be at least 2".into(),
        ));
    }
    model.check_theta(theta)?;
    let (p, d) = (model.p(), model.d());
    let xb = model.x_box();

    if p == 1 {
        let (x, _) = optim::maximize_on_box(
            |x| model.f_theta(x, theta)[0].powi(2),
            xb,
            opts.grid_n,
            opts.starts,
        );
        return finish(
            model,
            theta,
            vec![DesignPoint(x)],
            SolveMethod::Numeric,
            Uniqueness::Unknown,
            None,
        );
    }

    let grid = xb.grid(opts.grid_n);
    let fs: Vec<Vec<f64>> = grid.iter().map(|x| model.f_theta(x, theta)).collect();
    let best = top_combinations(&fs, p, opts.starts);
    if best.is_empty() {
        return Err(SaturatedError::InvalidOptions(
            "grid too coarse for p points".into(),
        ));
    }

    let big = BoxRegion::new(
        (0..p).flat_map(|_| xb.lower.iter().copied()).collect(),
        (0..p).flat_map(|_| xb.upper.iter().copied()).collect(),
    )?;
    let step: Vec<f64> = (0..p)
        .flat_map(|_| (0..d).map(|j| 0.5 * xb.width(j) / (opts.grid_n - 1) as f64))
        .collect();
    let neg_log_obj = |z: &[f64]| {
        let pts: Vec<DesignPoint> = z.chunks(d).map(|c| DesignPoint(c.to_vec())).collect();
        let v = objective(model, theta, &pts);
        if v > 0.0 {
            -v.ln()
        } else {
            f64::INFINITY
        }
    };
    let nm = NelderMeadOptions::default();

    let mut best_z: Vec<f64> = best[0]
        .1
        .iter()
        .flat_map(|&i| grid[i].iter().copied())
        .collect();
    let mut best_val = best[0].0;
    for (val, combo) in &best {
        let z0: Vec<f64> = combo
            .iter()
            .flat_map(|&i| grid[i].iter().copied())
            .collect();
        let m = optim::nelder_mead(neg_log_obj, &z0, &step, &big, &nm);
        let polished = (-m.value).exp();
        if polished > best_val && polished >= *val {
            best_val = polished;
            best_z = m.x;
        }
    }
    let pts: Vec<DesignPoint> = best_z.chunks(d).map(|c| DesignPoint(c.to_vec())).collect();
    finish(
        model,
        theta,
        pts,
        SolveMethod::Numeric,
        Uniqueness::Unknown,
        None,
    )
}

/// The `keep` best index sets `i₁ < … < i_p` by `det²`, best first.
fn top_combinations(fs: &[Vec<f64>], p: usize, keep: usize) -> Vec<(f64, Vec<usize>)> {
    let n = fs.len();
    let mut top: Vec<(f64, Vec<usize>)> = Vec::with_capacity(keep + 1);
    let mut consider = |v: f64, idx: &[usize]| {
        if !(v > 0.0) {
            return;
        }
        if top.len() == keep && v <= top[keep - 1].0 {
            return;
        }
        let pos = top.partition_point(|(w, _)| *w >= v);
        top.insert(pos, (v, idx.to_vec()));
        top.truncate(keep);
    };
    match p {
        2 => {
            for i in 0..n {
                for j in i + 1..n {
                    let v = linalg::det_columns(&[&fs[i], &fs[j]]).powi(2);
                    consider(v, &[i, j]);
                }
            }
        }
        3 => {
            for i in 0..n {
                for j in i + 1..n {
                    // cross products of the first two columns are reused
                    let (a, b) = (&fs[i], &fs[j]);
                    let cr = [
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                    ];
                    for (k, c) in fs.iter().enumerate().skip(j + 1) {
                        let v = (cr[0] * c[0] + cr[1] * c[1] + cr[2] * c[2]).powi(2);
                        consider(v, &[i, j, k]);
                    }
                }
            }
        }
        _ => {
            let mut idx: Vec<usize> = (0..p).collect();
            if n < p {
                return top;
            }
            loop {
                let cols: Vec<&[f64]> = idx.iter().map(|&i| fs[i].as_slice()).collect();
                consider(linalg::det_columns(&cols).powi(2), &idx);
                // next combination in lexicographic order
                let mut k = p;
                while k > 0 && idx[k - 1] == n - p + k - 1 {
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
                idx[k - 1] += 1;
                for m in k..p {
                    idx[m] = idx[m - 1] + 1;
                }
            }
        }
    }
    top
}

/// Closed form when allowed and available, numeric otherwise.
pub fn solve_saturated(
    model: &ModelSpec,
    theta: &[f64],
    choice: SolverChoice,
    opts: &NumericOptions,
) -> Result<SaturatedSolution, SaturatedError> {
    if choice == SolverChoice::ClosedFormPreferred {
        match solve_saturated_closed_form(model, theta) {
            Ok(s) => return Ok(s),
            Err(SaturatedError::NotAvailable(_)) | Err(SaturatedError::NoInteriorRoot) => {}
            Err(e) => return Err(e),
        }
    }
    solve_saturated_numeric(model, theta, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdStarReport {
    pub sd_star_holds: bool,
    pub max_sensitivity: f64,
    pub argmax: DesignPoint,
}

/// Whether the uniform design on the saturated solution is D-optimal among
/// all designs, by the Kiefer–Wolfowitz bound.
pub fn verify_saturated_vs_kw(
    model: &ModelSpec,
    theta: &[f64],
    solution: &SaturatedSolution,
    grid_n: usize,
    tol: f64,
) -> Result<SdStarReport, SaturatedError> {
    let design: Design = solution.points.to_design();
    let r = design::kw_check(&design, theta, model, grid_n, tol)?;
    Ok(SdStarReport {
        sd_star_holds: r.is_d_optimal,
        max_sensitivity: r.max_sensitivity,
        argmax: r.argmax,
    })
}
