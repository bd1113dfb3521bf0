//! Fixtures shared by the benchmarks.

use pstep::algorithm::{EstimatorKind, RunConfig};
use pstep::design::{Design, DesignPoint};
use pstep::estimators::ErrorModel;
use pstep::models::{builtin, BoxRegion, ModelOptions, ModelSpec};

fn bx(lo: &[f64], hi: &[f64]) -> BoxRegion {
    BoxRegion::new(lo.to_vec(), hi.to_vec()).expect("valid box")
}

pub fn logit() -> ModelSpec {
    builtin(
        "logit",
        bx(&[-10.0, 0.1], &[10.0, 10.0]),
        bx(&[-4.0], &[4.0]),
        &ModelOptions::default(),
    )
    .expect("valid model")
}

pub fn michaelis_menten() -> ModelSpec {
    builtin(
        "michaelis_menten",
        bx(&[0.1, 0.1], &[5.0, 5.0]),
        bx(&[0.0], &[10.0]),
        &ModelOptions::default(),
    )
    .expect("valid model")
}

pub fn poisson() -> ModelSpec {
    builtin(
        "poisson2",
        bx(&[-2.0, -2.0, -2.0], &[2.0, 0.0, 0.0]),
        bx(&[0.0, 0.0], &[2.0, 2.0]),
        &ModelOptions::default(),
    )
    .expect("valid model")
}

/// `n` evenly spaced, equally weighted points across a one-dimensional box.
pub fn even_design(model: &ModelSpec, n: usize) -> Design {
    let pts = model.x_box().grid(n).into_iter().map(DesignPoint).collect();
    Design::uniform(pts).expect("distinct points")
}

/// The logit setting used throughout the simulations, with `steps` batches.
pub fn logit_run(steps: usize) -> RunConfig {
    let mut cfg = RunConfig::new(
        &logit(),
        vec![0.0, 1.0],
        EstimatorKind::Mle,
        steps,
        ErrorModel::ExponentialFamily,
    );
    cfg.initial_points = [-4.0, 0.0, 4.0]
        .iter()
        .map(|&x| DesignPoint(vec![x]))
        .collect();
    cfg.fit.starts = 0;
    cfg
}
