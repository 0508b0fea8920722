//! The augmented Lasso
//!
//! ```text
//! minimize over (β, θ):  (1/2n)‖y − Xβ − √n θ‖² + λ_s‖β‖₁ + λ_o‖θ‖₁
//! ```
//!
//! and its profiled form in β alone, the ℓ1-penalized Huber M-estimator
//!
//! ```text
//! minimize over β:  λ_o² Σ_i Φ((y_i − X_iᵀβ)/(λ_o√n)) + λ_s‖β‖₁
//! ```
//!
//! Two independent solvers are provided: cyclic coordinate descent over the
//! `p + n` coordinates of `(β, θ)` ([`fit_cd`]) and accelerated proximal
//! gradient on the Huber form ([`fit_prox`]). Both stop on the KKT residual.

mod cd;
mod prox;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use cd::{fit_cd, fit_cd_from};
pub use prox::{fit_prox, fit_prox_from};

use crate::error::{Error, Result};
use crate::linalg::{l1_norm, sign};
use crate::model::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyPair {
    lambda_s: f64,
    lambda_o: f64,
}

impl PenaltyPair {
    pub fn new(lambda_s: f64, lambda_o: f64) -> Result<Self> {
        for (name, v) in [("lambda_s", lambda_s), ("lambda_o", lambda_o)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} = {v} must be finite and strictly positive")));
            }
        }
        Ok(PenaltyPair { lambda_s, lambda_o })
    }

    pub fn equal(lambda: f64) -> Result<Self> {
        Self::new(lambda, lambda)
    }

    pub fn lambda_s(&self) -> f64 {
        self.lambda_s
    }

    pub fn lambda_o(&self) -> f64 {
        self.lambda_o
    }

    /// `γ = λ_s / λ_o`.
    pub fn gamma(&self) -> f64 {
        self.lambda_s / self.lambda_o
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.lambda_s * c, self.lambda_o * c)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    CoordinateDescent,
    ProximalGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Full sweeps for coordinate descent, iterations for proximal gradient.
    pub max_sweeps: usize,
    pub kkt_tol: f64,
    /// Relative per-sweep decrease under which the objective counts as stalled.
    pub objective_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::CoordinateDescent,
            max_sweeps: 10_000,
            kkt_tol: 1e-8,
            objective_tol: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::invalid("max_sweeps must be at least 1"));
        }
        if !(self.kkt_tol >= 0.0) || !(self.objective_tol >= 0.0) {
            return Err(Error::invalid("solver tolerances must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(with = "crate::vecser")]
    pub beta_hat: DVector<f64>,
    #[serde(with = "crate::vecser")]
    pub theta_hat: DVector<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub sweeps_used: usize,
    pub converged: bool,
}

/// Dispatches on `config.algorithm`.
pub fn fit(data: &Dataset, penalties: &PenaltyPair, config: &SolverConfig) -> Result<FitResult> {
    match config.algorithm {
        Algorithm::CoordinateDescent => fit_cd(data, penalties, config),
        Algorithm::ProximalGradient => fit_prox(data, penalties, config),
    }
}

/// Huber's function: `u²/2` for `|u| ≤ 1`, `|u| − 1/2` otherwise.
pub fn huber(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 {
        0.5 * u * u
    } else {
        a - 0.5
    }
}

/// Derivative of [`huber`]: `u` clipped to `[-1, 1]`.
pub fn huber_derivative(u: f64) -> f64 {
    u.clamp(-1.0, 1.0)
}

pub fn soft_threshold(x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub(crate) fn check_dims(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, theta: Option<&DVector<f64>>) -> Result<()> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::dims("response", n, y.len()));
    }
    if beta.len() != p {
        return Err(Error::dims("beta", p, beta.len()));
    }
    if let Some(theta) = theta {
        if theta.len() != n {
            return Err(Error::dims("theta", n, theta.len()));
        }
    }
    Ok(())
}

/// `y − Xβ − √n θ`.
pub(crate) fn augmented_residual(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, theta: &DVector<f64>) -> DVector<f64> {
    let sqrt_n = (x.nrows() as f64).sqrt();
    let mut r = y - x * beta;
    r.axpy(-sqrt_n, theta, 1.0);
    r
}

pub fn objective_augmented(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
    theta: &DVector<f64>,
    penalties: &PenaltyPair,
) -> Result<f64> {
    check_dims(x, y, beta, Some(theta))?;
    let r = augmented_residual(x, y, beta, theta);
    Ok(augmented_from_residual(&r, beta, theta, penalties))
}

pub(crate) fn augmented_from_residual(r: &DVector<f64>, beta: &DVector<f64>, theta: &DVector<f64>, pen: &PenaltyPair) -> f64 {
    let n = r.len() as f64;
    r.norm_squared() / (2.0 * n) + pen.lambda_s * l1_norm(beta) + pen.lambda_o * l1_norm(theta)
}

pub fn objective_huber(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, penalties: &PenaltyPair) -> Result<f64> {
    check_dims(x, y, beta, None)?;
    let r = y - x * beta;
    Ok(huber_loss(&r, penalties.lambda_o) + penalties.lambda_s * l1_norm(beta))
}

/// Smooth part `λ_o² Σ Φ(r_i/(λ_o√n))` of the Huber objective.
pub(crate) fn huber_loss(r: &DVector<f64>, lambda_o: f64) -> f64 {
    let scale = lambda_o * (r.len() as f64).sqrt();
    lambda_o * lambda_o * r.iter().map(|&ri| huber(ri / scale)).sum::<f64>()
}

/// Gradient of the smooth part in β: `−(λ_o/√n) Xᵀψ(r/(λ_o√n))`.
pub fn huber_loss_gradient(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda_o: f64) -> Result<DVector<f64>> {
    check_dims(x, y, beta, None)?;
    let r = y - x * beta;
    Ok(huber_gradient_from_residual(x, &r, lambda_o))
}

pub(crate) fn huber_gradient_from_residual(x: &DMatrix<f64>, r: &DVector<f64>, lambda_o: f64) -> DVector<f64> {
    let sqrt_n = (x.nrows() as f64).sqrt();
    let scale = lambda_o * sqrt_n;
    let psi = r.map(|ri| huber_derivative(ri / scale));
    x.tr_mul(&psi) * (-lambda_o / sqrt_n)
}

/// Exact minimizer in θ of the augmented objective at fixed β:
/// `θ_i = soft((y_i − X_iᵀβ)/√n, λ_o)`.
pub fn profile_theta(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda_o: f64) -> Result<DVector<f64>> {
    check_dims(x, y, beta, None)?;
    if !(lambda_o > 0.0) {
        return Err(Error::invalid(format!("lambda_o = {lambda_o} must be positive")));
    }
    let r = y - x * beta;
    Ok(profile_from_residual(&r, lambda_o))
}

pub(crate) fn profile_from_residual(r: &DVector<f64>, lambda_o: f64) -> DVector<f64> {
    let sqrt_n = (r.len() as f64).sqrt();
    r.map(|ri| soft_threshold(ri / sqrt_n, lambda_o))
}

/// Largest violation of the optimality conditions of the augmented objective.
///
/// With `g = Xᵀr/n` and `h = r/√n` for `r = y − Xβ − √nθ`, a coordinate with a
/// nonzero value must satisfy `g_j = λ_s·sign(β_j)` (resp. `h_i = λ_o·sign(θ_i)`)
/// and a zero coordinate must satisfy `|g_j| ≤ λ_s` (resp. `|h_i| ≤ λ_o`).
pub fn kkt_residual(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
    theta: &DVector<f64>,
    penalties: &PenaltyPair,
) -> Result<f64> {
    check_dims(x, y, beta, Some(theta))?;
    let r = augmented_residual(x, y, beta, theta);
    Ok(kkt_from_residual(x, &r, beta, theta, penalties))
}

pub(crate) fn kkt_from_residual(x: &DMatrix<f64>, r: &DVector<f64>, beta: &DVector<f64>, theta: &DVector<f64>, pen: &PenaltyPair) -> f64 {
    let n = x.nrows() as f64;
    let sqrt_n = n.sqrt();
    let g = x.tr_mul(r) / n;
    let beta_part = g
        .iter()
        .zip(beta.iter())
        .map(|(&gj, &bj)| violation(gj, bj, pen.lambda_s))
        .fold(0.0, f64::max);
    r.iter()
        .zip(theta.iter())
        .map(|(&ri, &ti)| violation(ri / sqrt_n, ti, pen.lambda_o))
        .fold(beta_part, f64::max)
}

fn violation(grad: f64, coef: f64, lambda: f64) -> f64 {
    if coef != 0.0 {
        (grad - lambda * sign(coef)).abs()
    } else {
        (grad.abs() - lambda).max(0.0)
    }
}
