//! Robust sparse regression under adversarial response contamination.
//!
//! The estimator jointly fits a sparse coefficient vector `β` and a sparse
//! per-observation shift `θ` by penalized least squares (the augmented Lasso).
//! Profiling out `θ` gives an ℓ1-penalized Huber M-estimator, so both views are
//! exposed and cross-checked.
//!
//! Modules:
//! - [`model`]: covariance models, design sampling and contamination.
//! - [`solver`]: coordinate descent and accelerated proximal gradient, KKT checks.
//! - [`tuning`]: penalty-level rules.
//! - [`cert`]: design-condition constants and sampling-based checks.
//! - [`experiment`]: seeded Monte Carlo grid runner and summaries.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cert;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod solver;
pub mod tuning;
mod vecser;

pub use error::{Error, Result};
pub use experiment::{
    run_experiment, run_experiment_with, summarize, ExperimentConfig, LambdaRule, RunOptions, Summary, TrialRecord,
};
pub use model::{
    generate, make_beta, make_covariance, ContaminationSpec, CovarianceModel, Dataset, GroundTruth, IndexRule, Mechanism,
};
pub use rng::{derive_seed, rng_from_seed, ExperimentRng};
pub use solver::{fit, fit_cd, fit_prox, Algorithm, FitResult, PenaltyPair, SolverConfig};
pub use tuning::NoiseModel;

pub use nalgebra::{DMatrix, DVector};
