//! Reference quantities at the true parameter: the locally D-optimal design,
//! `M_*`, its inverse and the determinant used for D-efficiencies.

use super::SimError;
use crate::design::{information_matrix, kw_check, Design, DesignPoint, KwReport};
use crate::linalg;
use crate::models::{ModelConfig, ModelSpec};
use crate::saturated::{
    solve_saturated, NumericOptions, SaturatedSolution, SolverChoice, Uniqueness,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub const CARD_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOptions {
    pub solver: SolverChoice,
    pub numeric: NumericOptions,
    /// Grid points per axis for the Kiefer–Wolfowitz scan.
    pub grid_n: Option<usize>,
    /// Slack allowed above `p` in the Kiefer–Wolfowitz bound.
    pub kw_tol: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            solver: SolverChoice::default(),
            numeric: NumericOptions::default(),
            grid_n: None,
            kw_tol: 1e-6,
        }
    }
}

impl ReferenceOptions {
    /// 2001 per axis in one dimension, 201 in two.
    pub fn grid_for(&self, model: &ModelSpec) -> usize {
        self.grid_n
            .unwrap_or(if model.d() == 1 { 2001 } else { 201 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCard {
    pub schema_version: u32,
    pub kind: String,
    pub model: ModelConfig,
    pub theta: Vec<f64>,
    /// Best saturated design with uniform weights.
    pub saturated: SaturatedSolution,
    /// Locally D-optimal design among all designs.
    pub design: Design,
    pub m_star: Vec<Vec<f64>>,
    pub m_star_inv: Vec<Vec<f64>>,
    /// `d_*`: maximal `det M(ξ, θ̄)` over all designs.
    pub det_star: f64,
    /// `d_s*`: maximal determinant over saturated designs.
    pub det_saturated: f64,
    /// All optimal saturated designs share one information matrix.
    /// `None` when the numeric solver gives no uniqueness information.
    pub sd: Option<bool>,
    /// Some saturated design is optimal among all designs.
    pub sd_star: bool,
    pub kw: KwReport,
    pub kw_grid_n: usize,
    pub notes: Vec<String>,
}

impl ReferenceCard {
    pub fn m_star_inv_matrix(&self) -> DMatrix<f64> {
        let p = self.m_star_inv.len();
        DMatrix::from_fn(p, p, |i, j| self.m_star_inv[i][j])
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn reference_card(
    model: &ModelSpec,
    theta: &[f64],
    opts: &ReferenceOptions,
) -> Result<ReferenceCard, SimError> {
    model.check_theta(theta)?;
    let sat = solve_saturated(model, theta, opts.solver, &opts.numeric)?;
    let grid_n = opts.grid_for(model);
    let sat_design = sat.points.to_design();
    let kw = kw_check(&sat_design, theta, model, grid_n, opts.kw_tol)?;
    let sat_info = information_matrix(&sat_design, theta, model)?;
    let det_saturated = sat_info.det();
    let mut notes = Vec::new();
    let sd = match sat.uniqueness {
        Uniqueness::Unique => Some(true),
        Uniqueness::NonUnique => {
            notes.push(
                "NonUniqueOptimum: optimal saturated designs have differing information matrices"
                    .into(),
            );
            Some(false)
        }
        Uniqueness::Unknown => None,
    };
    let (design, info) = if kw.is_d_optimal {
        (sat_design, sat_info)
    } else {
        let d = d_optimal_on_grid(model, theta, grid_n.min(41), 1e-7, 20_000);
        notes.push(format!(
            "saturated design is not optimal (max sensitivity {:.6} > {}); reference uses a grid-optimal design",
            kw.max_sensitivity,
            model.p()
        ));
        let info = information_matrix(&d, theta, model)?;
        if info.det() >= det_saturated {
            (d, info)
        } else {
            (sat_design, sat_info)
        }
    };
    let inv = info.inverse()?;
    Ok(ReferenceCard {
        schema_version: CARD_SCHEMA_VERSION,
        kind: "reference_card".into(),
        model: ModelConfig::from(model),
        theta: theta.to_vec(),
        det_star: info.det(),
        det_saturated,
        m_star: info.to_rows(),
        m_star_inv: rows(&inv),
        sd,
        sd_star: kw.is_d_optimal,
        saturated: sat,
        design,
        kw,
        kw_grid_n: grid_n,
        notes,
    })
}

/// Multiplicative weight iteration `w ← w·d(x)/p` on a grid with `grid_n`
/// points per axis, stopped once `max d ≤ p(1 + tol)`. Support points with
/// weight below `1e-6` are dropped.
pub fn d_optimal_on_grid(
    model: &ModelSpec,
    theta: &[f64],
    grid_n: usize,
    tol: f64,
    max_iter: usize,
) -> Design {
    let p = model.p();
    let grid = model.x_box().grid(grid_n);
    let fs: Vec<Vec<f64>> = grid.iter().map(|x| model.f_theta(x, theta)).collect();
    let mut w = vec![1.0 / grid.len() as f64; grid.len()];
    let mut d = vec![0.0; grid.len()];
    for _ in 0..max_iter {
        let mut m = DMatrix::zeros(p, p);
        for (f, &wi) in fs.iter().zip(&w) {
            for i in 0..p {
                for j in 0..p {
                    m[(i, j)] += wi * f[i] * f[j];
                }
            }
        }
        let Some(inv) = linalg::spd_inverse(&m) else {
            break;
        };
        let mut dmax = 0.0f64;
        for (di, f) in d.iter_mut().zip(&fs) {
            let mut s = 0.0;
            for i in 0..p {
                for j in 0..p {
                    s += f[i] * inv[(i, j)] * f[j];
                }
            }
            *di = s;
            dmax = dmax.max(s);
        }
        if dmax <= p as f64 * (1.0 + tol) {
            break;
        }
        for (wi, di) in w.iter_mut().zip(&d) {
            *wi *= di / p as f64;
        }
    }
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] >= 1e-6).collect();
    let total: f64 = keep.iter().map(|&i| w[i]).sum();
    Design::new(
        keep.iter().map(|&i| DesignPoint(grid[i].clone())).collect(),
        keep.iter().map(|&i| w[i] / total).collect(),
    )
    .expect("grid points are distinct")
}
