//! Registry of nonlinear regression and GLM model families.
//!
//! A [`ModelSpec`] bundles the mean response `μ(x, θ)`, the elemental
//! regressor `f_θ(x)` whose outer products build information matrices, the
//! parameter box `Θ`, and the design box `X`.

mod glm;
mod transform;

pub use glm::{
    normal_cdf, normal_log_cdf, normal_pdf, sigmoid, softplus, GlmBlock, Link, ResponseKind,
};
pub use transform::{
    canonical_transform_binary, canonical_transform_poisson, BinaryTransform, PoissonCase,
    PoissonTransform,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("box violation: {0}")]
    BoxViolation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} does not apply to model `{1}`")]
    NotApplicable(&'static str, String),
    #[error("slope parameter is numerically zero")]
    DegenerateSlope,
    #[error("model `{0}` has no exponential-family block")]
    MissingGlmBlock(String),
}

/// Axis-aligned box `Π [lower_j, upper_j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Parameter space `Θ`.
pub type ParamBox = BoxRegion;
/// Experimental region `X`.
pub type DesignBox = BoxRegion;

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(ModelError::BoxViolation(format!(
                "bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(ModelError::BoxViolation(format!(
                    "axis {j}: need finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(BoxRegion { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    /// True when some coordinate lies within `tol` of a face.
    pub fn on_boundary(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(v, (l, u))| (v - l).abs() <= tol || (u - v).abs() <= tol)
    }

    /// Uniform tensor grid with `n` points per axis, row-major in axis order.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        let n = n.max(2);
        let d = self.dim();
        let total = n.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let mut pt = vec![0.0; d];
                for j in (0..d).rev() {
                    let i = idx % n;
                    idx /= n;
                    pt[j] = self.lower[j] + self.width(j) * i as f64 / (n - 1) as f64;
                }
                pt
            })
            .collect()
    }
}

/// Structural conditions a model satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    /// Saturated identifiability: `f_θ = ∇_θ μ` and `p` distinct points identify `θ`.
    pub si: bool,
    /// `f_θ(x) = ψ(x, θ) f(x)` with `ψ > 0`.
    pub glm: bool,
    /// GLM plus `μ = G(f(x)ᵀθ)` with `G' > 0`.
    pub glm_star: bool,
}

/// Built-in model families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `μ = θ₁x/(θ₂+x)`.
    MichaelisMenten,
    /// `μ = θ₁ exp(-θ₂x)`.
    ExpDecay,
    /// Binary response, `μ = G(θ₁ + θ₂x)`.
    Binary { link: Link },
    /// Poisson response with two covariates, `μ = exp(θ₀ + θ₁x₁ + θ₂x₂)`.
    Poisson2,
    /// Polynomial regression `μ = Σ θ_j x^j`, `j < p`. Auxiliary test model.
    Linear { degree: usize },
    /// One-parameter decay `μ = exp(-θx)` (`p = 1`). Auxiliary test model.
    ExpDecay1,
}

/// Construction options passed alongside the model name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Skewed-logit exponent, default 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// Polynomial degree of the `linear` model, default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

pub const BUILTIN_NAMES: &[&str] = &[
    "michaelis_menten",
    "exp_decay",
    "logit",
    "cloglog",
    "probit",
    "skewed_logit",
    "poisson2",
    "linear",
    "exp_decay1",
];

/// Serializable model reference: `{name, theta_box, x_box, options}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub theta_box: BoxRegion,
    pub x_box: BoxRegion,
    #[serde(default)]
    pub options: ModelOptions,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        builtin(
            &self.name,
            self.theta_box.clone(),
            self.x_box.clone(),
            &self.options,
        )
    }
}

impl From<&ModelSpec> for ModelConfig {
    fn from(m: &ModelSpec) -> Self {
        ModelConfig {
            name: m.name().to_string(),
            theta_box: m.theta_box().clone(),
            x_box: m.x_box().clone(),
            options: m.options(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    family: Family,
    theta_box: ParamBox,
    x_box: DesignBox,
}

/// Constructs a built-in model, validating both boxes.
pub fn builtin(
    name: &str,
    theta_box: ParamBox,
    x_box: DesignBox,
    options: &ModelOptions,
) -> Result<ModelSpec, ModelError> {
    let family = match name {
        "michaelis_menten" => Family::MichaelisMenten,
        "exp_decay" => Family::ExpDecay,
        "logit" => Family::Binary { link: Link::Logit },
        "cloglog" => Family::Binary {
            link: Link::Cloglog,
        },
        "probit" => Family::Binary { link: Link::Probit },
        "skewed_logit" => {
            let m = options.m.unwrap_or(2.0);
            if !(m > 0.0 && m.is_finite()) {
                return Err(ModelError::BoxViolation(format!(
                    "skewed_logit needs m > 0, got {m}"
                )));
            }
            Family::Binary {
                link: Link::SkewedLogit { m },
            }
        }
        "poisson2" => Family::Poisson2,
        "linear" => Family::Linear {
            degree: options.degree.unwrap_or(1),
        },
        "exp_decay1" => Family::ExpDecay1,
        other => return Err(ModelError::UnknownModel(other.to_string())),
    };
    ModelSpec::new(family, theta_box, x_box)
}

impl ModelSpec {
    pub fn new(family: Family, theta_box: ParamBox, x_box: DesignBox) -> Result<Self, ModelError> {
        let theta_box = BoxRegion::new(theta_box.lower, theta_box.upper)?;
        let x_box = BoxRegion::new(x_box.lower, x_box.upper)?;
        let spec = ModelSpec {
            family,
            theta_box,
            x_box,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (p, d) = (self.p(), self.d());
        if self.theta_box.dim() != p {
            return Err(ModelError::DimensionMismatch {
                expected: p,
                got: self.theta_box.dim(),
            });
        }
        if self.x_box.dim() != d {
            return Err(ModelError::DimensionMismatch {
                expected: d,
                got: self.x_box.dim(),
            });
        }
        let violation =
            |msg: &str| Err(ModelError::BoxViolation(format!("{}: {msg}", self.name())));
        match self.family {
            Family::MichaelisMenten | Family::ExpDecay => {
                if self.theta_box.lower.iter().any(|&l| l <= 0.0) {
                    return violation("parameter box must lie in (0, inf)^2");
                }
                if self.x_box.lower[0] < 0.0 {
                    return violation("design interval must lie in [0, inf)");
                }
            }
            Family::Poisson2 => {
                if self.theta_box.upper[1] > 0.0 || self.theta_box.upper[2] > 0.0 {
                    return violation("slope parameters must be nonpositive");
                }
                if self.x_box.lower.iter().any(|&l| l != 0.0) {
                    return violation("design box must be [0, b1] x [0, b2]");
                }
            }
            Family::ExpDecay1 => {
                if self.x_box.lower[0] <= 0.0 {
                    return violation("design interval must lie in (0, inf)");
                }
                if self.theta_box.lower[0] <= 0.0 {
                    return violation("parameter must be positive");
                }
            }
            Family::Linear { degree } => {
                if degree > 2 {
                    return violation("degree above 2 is not supported");
                }
            }
            Family::Binary { .. } => {}
        }
        if let Some(glm) = self.glm_block() {
            self.preflight(&glm)?;
        }
        Ok(())
    }

    /// The reachable linear predictors must keep `G` and `G'` finite.
    fn preflight(&self, glm: &GlmBlock) -> Result<(), ModelError> {
        let xs = self.x_box.grid(21);
        let thetas = self.theta_box.grid(21);
        let mut f = vec![0.0; self.p()];
        for x in &xs {
            self.regressor_into(x, &mut f);
            for th in &thetas {
                let u: f64 = f.iter().zip(th).map(|(a, b)| a * b).sum();
                let (g, gp) = (glm.link.g(u), glm.link.g_prime(u));
                if !(g.is_finite() && gp.is_finite()) {
                    return Err(ModelError::BoxViolation(format!(
                        "{}: inverse link not finite at linear predictor {u}",
                        self.name()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::MichaelisMenten => "michaelis_menten",
            Family::ExpDecay => "exp_decay",
            Family::Binary { link } => match link {
                Link::Logit => "logit",
                Link::Cloglog => "cloglog",
                Link::Probit => "probit",
                Link::SkewedLogit { .. } => "skewed_logit",
                Link::Log => "binary_log",
            },
            Family::Poisson2 => "poisson2",
            Family::Linear { .. } => "linear",
            Family::ExpDecay1 => "exp_decay1",
        }
    }

    pub fn options(&self) -> ModelOptions {
        match self.family {
            Family::Binary {
                link: Link::SkewedLogit { m },
            } => ModelOptions {
                m: Some(m),
                degree: None,
            },
            Family::Linear { degree } => ModelOptions {
                m: None,
                degree: Some(degree),
            },
            _ => ModelOptions::default(),
        }
    }

    /// Parameter dimension `p`.
    pub fn p(&self) -> usize {
        match self.family {
            Family::MichaelisMenten | Family::ExpDecay | Family::Binary { .. } => 2,
            Family::Poisson2 => 3,
            Family::Linear { degree } => degree + 1,
            Family::ExpDecay1 => 1,
        }
    }

    /// Design dimension `d`.
    pub fn d(&self) -> usize {
        match self.family {
            Family::Poisson2 => 2,
            _ => 1,
        }
    }

    pub fn theta_box(&self) -> &ParamBox {
        &self.theta_box
    }

    pub fn x_box(&self) -> &DesignBox {
        &self.x_box
    }

    pub fn conditions(&self) -> Conditions {
        match self.family {
            Family::MichaelisMenten | Family::ExpDecay | Family::ExpDecay1 => Conditions {
                si: true,
                glm: false,
                glm_star: false,
            },
            Family::Binary { .. } | Family::Poisson2 => Conditions {
                si: false,
                glm: true,
                glm_star: true,
            },
            Family::Linear { .. } => Conditions {
                si: true,
                glm: true,
                glm_star: true,
            },
        }
    }

    pub fn glm_block(&self) -> Option<GlmBlock> {
        match self.family {
            Family::Binary { link } => Some(GlmBlock::bernoulli(link)),
            Family::Poisson2 => Some(GlmBlock::poisson()),
            _ => None,
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.d() {
            return Err(ModelError::DimensionMismatch {
                expected: self.d(),
                got: x.len(),
            });
        }
        if !self.x_box.contains(x) {
            return Err(ModelError::BoxViolation(format!(
                "design point {x:?} outside X"
            )));
        }
        Ok(())
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<(), ModelError> {
        if theta.len() != self.p() {
            return Err(ModelError::DimensionMismatch {
                expected: self.p(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Base regressor `f(x)` of GLM-type families; `None` otherwise.
    pub fn has_regressor(&self) -> bool {
        self.conditions().glm
    }

    /// Writes `f(x)` for GLM-type families (`(1, x)`, `(1, x₁, x₂)`, ...).
    pub fn regressor_into(&self, x: &[f64], out: &mut [f64]) {
        match self.family {
            Family::Poisson2 => {
                out[0] = 1.0;
                out[1] = x[0];
                out[2] = x[1];
            }
            Family::Linear { degree } => {
                let mut v = 1.0;
                for o in out.iter_mut().take(degree + 1) {
                    *o = v;
                    v *= x[0];
                }
            }
            _ => {
                out[0] = 1.0;
                out[1] = x[0];
            }
        }
    }

    /// Linear predictor `f(x)ᵀθ` of GLM-type families.
    pub fn linear_predictor(&self, x: &[f64], theta: &[f64]) -> f64 {
        match self.family {
            Family::Poisson2 => theta[0] + theta[1] * x[0] + theta[2] * x[1],
            Family::Linear { degree } => {
                let mut acc = 0.0;
                for j in (0..=degree).rev() {
                    acc = acc * x[0] + theta[j];
                }
                acc
            }
            _ => theta[0] + theta[1] * x[0],
        }
    }

    /// `ψ(x, θ)` in `f_θ(x) = ψ(x, θ) f(x)`; 1 for linear models.
    pub fn psi(&self, x: &[f64], theta: &[f64]) -> Option<f64> {
        match self.family {
            Family::Binary { link } => {
                Some(GlmBlock::bernoulli(link).phi(self.linear_predictor(x, theta)))
            }
            Family::Poisson2 => Some((0.5 * self.linear_predictor(x, theta)).exp()),
            Family::Linear { .. } => Some(1.0),
            _ => None,
        }
    }

    /// Mean response `μ(x, θ)`.
    pub fn mean(&self, x: &[f64], theta: &[f64]) -> f64 {
        let x0 = x[0];
        match self.family {
            Family::MichaelisMenten => theta[0] * x0 / (theta[1] + x0),
            Family::ExpDecay => theta[0] * (-theta[1] * x0).exp(),
            Family::Binary { link } => link.g(self.linear_predictor(x, theta)),
            Family::Poisson2 => self.linear_predictor(x, theta).exp(),
            Family::Linear { .. } => self.linear_predictor(x, theta),
            Family::ExpDecay1 => (-theta[0] * x0).exp(),
        }
    }

    /// Writes the elemental regressor `f_θ(x)` into `out` (length `p`).
    pub fn f_theta_into(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let x0 = x[0];
        match self.family {
            Family::MichaelisMenten => {
                let s = theta[1] + x0;
                out[0] = x0 / s;
                out[1] = -theta[0] * x0 / (s * s);
            }
            Family::ExpDecay => {
                let e = (-theta[1] * x0).exp();
                out[0] = e;
                out[1] = -theta[0] * x0 * e;
            }
            Family::ExpDecay1 => {
                out[0] = -x0 * (-theta[0] * x0).exp();
            }
            Family::Binary { .. } | Family::Poisson2 | Family::Linear { .. } => {
                let psi = self.psi(x, theta).unwrap_or(1.0);
                self.regressor_into(x, out);
                for o in out.iter_mut() {
                    *o *= psi;
                }
            }
        }
    }

    pub fn f_theta(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p()];
        self.f_theta_into(x, theta, &mut out);
        out
    }

    /// Writes `∇_θ μ(x, θ)` into `out`.
    pub fn mean_gradient_into(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        match self.family {
            Family::Binary { link } => {
                let u = self.linear_predictor(x, theta);
                let gp = link.g_prime(u);
                self.regressor_into(x, out);
                out.iter_mut().for_each(|o| *o *= gp);
            }
            Family::Poisson2 => {
                let mu = self.mean(x, theta);
                self.regressor_into(x, out);
                out.iter_mut().for_each(|o| *o *= mu);
            }
            _ => self.f_theta_into(x, theta, out),
        }
    }
}

/// Compares `f_θ(x)` against central finite differences of `μ`; returns the
/// largest componentwise absolute error. Only defined for models where
/// `f_θ = ∇_θ μ`.
pub fn verify_gradient(model: &ModelSpec, theta: &[f64], x: &[f64]) -> Result<f64, ModelError> {
    if !model.conditions().si {
        return Err(ModelError::NotApplicable(
            "gradient check",
            model.name().to_string(),
        ));
    }
    model.check_theta(theta)?;
    model.check_point(x)?;
    let f = model.f_theta(x, theta);
    let mut th = theta.to_vec();
    let mut worst: f64 = 0.0;
    for j in 0..theta.len() {
        let h = 1e-6 * (1.0 + theta[j].abs());
        th[j] = theta[j] + h;
        let up = model.mean(x, &th);
        th[j] = theta[j] - h;
        let dn = model.mean(x, &th);
        th[j] = theta[j];
        worst = worst.max(((up - dn) / (2.0 * h) - f[j]).abs());
    }
    Ok(worst)
}
