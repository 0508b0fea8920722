//! Closed-form tuning-parameter rules.

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_diag_sqrt, max_scaled_column_norm};
use crate::solver::PenaltyPair;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma: f64,
    delta: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64, delta: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("noise level sigma = {sigma} must be positive")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("tolerance delta = {delta} must lie in (0, 1)")));
        }
        Ok(NoiseModel { sigma, delta })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn positive_log(ratio: f64, what: &str) -> Result<f64> {
    if ratio <= 1.0 {
        return Err(Error::invalid(format!("{what} = {ratio} must exceed 1 for a positive logarithm")));
    }
    Ok(ratio.ln())
}

/// `λ_s = 3σ√(log(p/δ)/n)`, `λ_o = σ√(8 log(n/δ)/n)`.
pub fn lambda_theorem3(n: usize, p: usize, noise: &NoiseModel) -> Result<PenaltyPair> {
    if n == 0 || p == 0 {
        return Err(Error::invalid("n and p must be at least 1"));
    }
    let nf = n as f64;
    let log_p = positive_log(p as f64 / noise.delta, "p/delta")?;
    let log_n = positive_log(nf / noise.delta, "n/delta")?;
    PenaltyPair::new(
        3.0 * noise.sigma * (log_p / nf).sqrt(),
        noise.sigma * (8.0 * log_n / nf).sqrt(),
    )
}

/// Common value `√((8/n)(log(p/s) + log(n/o)))` of the experiment rule.
///
/// Returns `0` (with a warning) in the degenerate case `s = p`, `o = n`.
pub fn lambda_experiment_value(n: usize, p: usize, s: usize, o: usize) -> Result<f64> {
    if o == 0 {
        return Err(Error::invalid(
            "the experiment rule is undefined for o = 0 (log(n/o)); use lambda_theorem3 instead",
        ));
    }
    if s == 0 || s > p {
        return Err(Error::invalid(format!("experiment rule needs 1 <= s <= p (s={s}, p={p})")));
    }
    if o > n {
        return Err(Error::invalid(format!("experiment rule needs o <= n (o={o}, n={n})")));
    }
    let nf = n as f64;
    let value = (8.0 / nf * ((p as f64 / s as f64).ln() + (nf / o as f64).ln())).sqrt();
    if value == 0.0 {
        warn!("experiment rule is degenerate (s = p and o = n): lambda = 0");
    }
    Ok(value)
}

/// `λ_s = λ_o = √((8/n)(log(p/s) + log(n/o)))`.
pub fn lambda_experiment(n: usize, p: usize, s: usize, o: usize) -> Result<PenaltyPair> {
    let value = lambda_experiment_value(n, p, s, o)?;
    if value == 0.0 {
        return Err(Error::DegeneratePenalty(format!(
            "experiment rule gives lambda = 0 for s = p = {p}, o = n = {n}"
        )));
    }
    PenaltyPair::equal(value)
}

/// Penalty levels that dominate the noise with probability `1 − δ`:
///
/// `λ_o = 2σ√(2 log(3n/δ)/n)` and
/// `λ_s = 2σρ√(2 log(3p/δ)/n)·(1 + √(2 log(3p/δ)/n))`,
///
/// where `ρ = max_j √Σ_jj` when `Σ` is known and `max_j ‖X_j‖₂/√n` otherwise.
pub fn lambda_empirical(x: &DMatrix<f64>, sigma: Option<&DMatrix<f64>>, noise: &NoiseModel) -> Result<PenaltyPair> {
    let (n, p) = x.shape();
    let nf = n as f64;
    let log_p = (3.0 * p as f64 / noise.delta).ln();
    if nf < 2.0 * log_p {
        return Err(Error::invalid(format!(
            "empirical rule requires n >= 2 log(3p/delta) = {:.4}, got n = {n}",
            2.0 * log_p
        )));
    }
    let rho = match sigma {
        Some(s) => {
            if s.shape() != (p, p) {
                return Err(Error::dims("covariance", format!("{p}x{p}"), format!("{}x{}", s.nrows(), s.ncols())));
            }
            max_diag_sqrt(s)
        }
        None => max_scaled_column_norm(x),
    };
    let tail_p = (2.0 * log_p / nf).sqrt();
    let tail_n = (2.0 * (3.0 * nf / noise.delta).ln() / nf).sqrt();
    PenaltyPair::new(2.0 * noise.sigma * rho * tail_p * (1.0 + tail_p), 2.0 * noise.sigma * tail_n)
}

/// Smallest admissible common λ for the general-design risk bound:
/// `λ√n = max(√(8 log(n/δ)), max_j ‖X_j/√n‖₂ · √(8 log(p/δ)))`.
pub fn lambda_bound_theorem1(x: &DMatrix<f64>, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta = {delta} must lie in (0, 1)")));
    }
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::invalid("design must be non-empty"));
    }
    let nf = n as f64;
    let outlier_branch = (8.0 * (nf / delta).ln()).sqrt();
    let design_branch = max_scaled_column_norm(x) * (8.0 * (p as f64 / delta).ln()).sqrt();
    Ok(outlier_branch.max(design_branch) / nf.sqrt())
}
