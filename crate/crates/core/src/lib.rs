//! Adaptive D-optimal designs for nonlinear regression.

// `!(x > 0.0)` is used on purpose so that NaN takes the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithm;
pub mod design;
pub mod estimators;
pub mod linalg;
pub mod models;
pub mod optim;
pub mod rng;
pub mod saturated;
pub mod sim;

pub use algorithm::{
    replay, run_p_step, run_wynn, AlgoError, AlgorithmKind, EstimatorKind, PathRecord, RunConfig,
};
pub use design::{
    d_efficiency, information_matrix, kw_check, kw_sensitivity, log_det, Design, DesignError,
    DesignPoint, InfoMatrix, KwReport, SaturatedDesign,
};
pub use estimators::{
    lse_fit, mle_fit, sample_response, Dataset, ErrorModel, EstimError, Estimate, FitOptions,
};
pub use models::{
    builtin, BoxRegion, DesignBox, Family, Link, ModelConfig, ModelError, ModelOptions, ModelSpec,
    ParamBox,
};
pub use rng::SeededStream;
pub use saturated::{
    solve_saturated, solve_saturated_closed_form, solve_saturated_numeric, NumericOptions,
    SaturatedError, SaturatedSolution, SolverChoice,
};
pub use sim::{compare, reference_card, simulate, ReferenceCard, SimConfig, SimError, SimSummary};
