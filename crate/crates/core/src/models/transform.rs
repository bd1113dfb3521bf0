//! Canonical reparametrizations of the design variable for GLM families.

use super::{DesignBox, Family, ModelError, ModelSpec};
use serde::{Deserialize, Serialize};

/// Affine map `z = θ₁ + θ₂x` taking `[a, b]` onto `[α, β]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryTransform {
    pub alpha: f64,
    pub beta: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl BinaryTransform {
    /// True when the slope is negative, so `a` maps to `β`.
    pub fn flipped(&self) -> bool {
        self.slope < 0.0
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    pub fn inverse(&self, z: f64) -> f64 {
        (z - self.intercept) / self.slope
    }
}

pub fn canonical_transform_binary(
    model: &ModelSpec,
    theta: &[f64],
) -> Result<BinaryTransform, ModelError> {
    if !matches!(model.family(), Family::Binary { .. }) {
        return Err(ModelError::NotApplicable(
            "binary canonical transform",
            model.name().to_string(),
        ));
    }
    model.check_theta(theta)?;
    let (intercept, slope) = (theta[0], theta[1]);
    if slope.abs() < 1e-12 {
        return Err(ModelError::DegenerateSlope);
    }
    let (a, b) = (model.x_box().lower[0], model.x_box().upper[0]);
    let (za, zb) = (intercept + slope * a, intercept + slope * b);
    Ok(BinaryTransform {
        alpha: za.min(zb),
        beta: za.max(zb),
        intercept,
        slope,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoissonCase {
    /// Both slopes negative.
    BothNegative,
    /// Exactly one slope zero.
    OneZero,
    /// Both slopes zero.
    BothZero,
}

impl PoissonCase {
    pub fn label(&self) -> &'static str {
        match self {
            PoissonCase::BothNegative => "i",
            PoissonCase::OneZero => "ii",
            PoissonCase::BothZero => "iii",
        }
    }
}

/// Coordinatewise map `z_j = |θ_j| x_j` (or `z_j = x_j` for a zero slope)
/// onto `[0, c₁] x [0, c₂]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonTransform {
    pub case: PoissonCase,
    pub c: [f64; 2],
    scale: [f64; 2],
    /// True when only the second slope is negative; the canonical form then
    /// swaps axes so that the negative slope is always the first one.
    pub swapped: bool,
}

impl PoissonTransform {
    pub fn forward(&self, x: &[f64]) -> [f64; 2] {
        let z = [self.scale[0] * x[0], self.scale[1] * x[1]];
        if self.swapped {
            [z[1], z[0]]
        } else {
            z
        }
    }

    pub fn inverse(&self, z: &[f64]) -> [f64; 2] {
        let z = if self.swapped {
            [z[1], z[0]]
        } else {
            [z[0], z[1]]
        };
        [z[0] / self.scale[0], z[1] / self.scale[1]]
    }
}

pub fn canonical_transform_poisson(
    theta: &[f64],
    x_box: &DesignBox,
) -> Result<PoissonTransform, ModelError> {
    if theta.len() != 3 {
        return Err(ModelError::DimensionMismatch {
            expected: 3,
            got: theta.len(),
        });
    }
    if theta[1] > 0.0 || theta[2] > 0.0 {
        return Err(ModelError::BoxViolation(
            "poisson slopes must be nonpositive".into(),
        ));
    }
    let b = [x_box.upper[0], x_box.upper[1]];
    let scale = [
        if theta[1] < 0.0 { -theta[1] } else { 1.0 },
        if theta[2] < 0.0 { -theta[2] } else { 1.0 },
    ];
    let c = [scale[0] * b[0], scale[1] * b[1]];
    let (case, swapped) = match (theta[1] < 0.0, theta[2] < 0.0) {
        (true, true) => (PoissonCase::BothNegative, false),
        (true, false) => (PoissonCase::OneZero, false),
        (false, true) => (PoissonCase::OneZero, true),
        (false, false) => (PoissonCase::BothZero, false),
    };
    let c = if swapped { [c[1], c[0]] } else { c };
    Ok(PoissonTransform {
        case,
        c,
        scale,
        swapped,
    })
}
