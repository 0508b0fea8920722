use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, l1_norm};

/// Sampled upper bound on the restricted eigenvalue constant `ϰ` of `RE(s, c0)`.
///
/// Each probe draws a support `J` with `|J| = s`, a Gaussian `v_J`, and a
/// Gaussian off-support part rescaled so `‖v_{Jᶜ}‖₁ = t·c0·‖v_J‖₁` with
/// `t ∈ {0, 0.5, 1}`. The result is the smallest `‖Σ^{1/2}v‖₂ / ‖v_J‖₂` seen,
/// which can only overestimate the true constant.
pub fn re_estimate<R: Rng + ?Sized>(sigma: &DMatrix<f64>, s: usize, c0: f64, n_samples: usize, rng: &mut R) -> Result<f64> {
    let p = sigma.nrows();
    if sigma.ncols() != p {
        return Err(Error::dims("covariance", "square matrix", format!("{}x{}", p, sigma.ncols())));
    }
    if s == 0 || s > p {
        return Err(Error::invalid(format!("RE sparsity must satisfy 1 <= s <= p (s={s}, p={p})")));
    }
    if !(c0 >= 0.0) {
        return Err(Error::invalid(format!("cone constant c0 = {c0} must be nonnegative")));
    }
    if n_samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let root = linalg::sym_sqrt(sigma)?;
    let mut best = f64::INFINITY;
    for i in 0..n_samples {
        let t = [0.0, 0.5, 1.0][i % 3];
        let support = index::sample(rng, p, s).into_vec();
        let mut in_support = vec![false; p];
        let mut v = DVector::zeros(p);
        for &j in &support {
            in_support[j] = true;
            v[j] = StandardNormal.sample(rng);
        }
        let on_l1 = l1_norm(&v);
        let on_l2 = v.norm();
        if on_l2 == 0.0 {
            continue;
        }
        if t > 0.0 && c0 > 0.0 && s < p {
            let mut off = DVector::zeros(p);
            for j in (0..p).filter(|&j| !in_support[j]) {
                off[j] = StandardNormal.sample(rng);
            }
            let off_l1 = l1_norm(&off);
            if off_l1 > 0.0 {
                v += off * (t * c0 * on_l1 / off_l1);
            }
        }
        best = best.min((&root * &v).norm() / on_l2);
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `E‖Σ^{1/2}ξ‖∞` for standard Gaussian `ξ`, the
/// Gaussian width of the image of the ℓ1 ball under `Σ^{1/2}`.
pub fn gaussian_width_b1<R: Rng + ?Sized>(sigma: &DMatrix<f64>, n_samples: usize, rng: &mut R) -> Result<WidthEstimate> {
    if n_samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    linalg::check_psd(sigma)?;
    let root = linalg::sym_sqrt(sigma)?;
    let p = sigma.nrows();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let xi = DVector::from_fn(p, |_, _| StandardNormal.sample(rng));
        let m = (&root * xi).amax();
        sum += m;
        sum_sq += m * m;
    }
    let nf = n_samples as f64;
    let mean = sum / nf;
    let std_error = if n_samples > 1 {
        ((sum_sq - nf * mean * mean).max(0.0) / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    Ok(WidthEstimate {
        estimate: mean,
        std_error,
        samples: n_samples,
    })
}

/// Analytic bound `max_j √Σ_jj · √(2 log p)` on [`gaussian_width_b1`].
/// Vacuous (zero) for `p = 1`.
pub fn width_bound(sigma: &DMatrix<f64>) -> f64 {
    let p = sigma.nrows();
    if p <= 1 {
        warn!("width bound is vacuous for p = 1 (log 1 = 0)");
        return 0.0;
    }
    linalg::max_diag_sqrt(sigma) * (2.0 * (p as f64).ln()).sqrt()
}
