use nalgebra::DVector;

use super::{
    augmented_from_residual, huber_gradient_from_residual, kkt_from_residual, profile_from_residual, soft_threshold, FitResult,
    PenaltyPair, SolverConfig,
};
use crate::error::{Error, Result};
use crate::linalg::max_gram_eigenvalue;
use crate::model::Dataset;

/// Accelerated proximal gradient (FISTA with gradient-based adaptive restart)
/// on the Huber form. θ̂ is reported as the profiled minimizer at β̂.
pub fn fit_prox(data: &Dataset, penalties: &PenaltyPair, config: &SolverConfig) -> Result<FitResult> {
    run(data, penalties, config, DVector::zeros(data.p()))
}

pub fn fit_prox_from(data: &Dataset, penalties: &PenaltyPair, config: &SolverConfig, start: &FitResult) -> Result<FitResult> {
    if start.beta_hat.len() != data.p() {
        return Err(Error::dims("warm start beta", data.p(), start.beta_hat.len()));
    }
    run(data, penalties, config, start.beta_hat.clone())
}

struct Point {
    theta: DVector<f64>,
    kkt: f64,
}

fn evaluate(data: &Dataset, beta: &DVector<f64>, pen: &PenaltyPair) -> Point {
    let r = &data.y - &data.x * beta;
    let theta = profile_from_residual(&r, pen.lambda_o());
    let sqrt_n = (data.n() as f64).sqrt();
    let mut aug = r;
    aug.axpy(-sqrt_n, &theta, 1.0);
    let kkt = kkt_from_residual(&data.x, &aug, beta, &theta, pen);
    Point { theta, kkt }
}

fn run(data: &Dataset, pen: &PenaltyPair, config: &SolverConfig, mut beta: DVector<f64>) -> Result<FitResult> {
    config.validate()?;
    let x = &data.x;
    let y = &data.y;
    if y.len() != x.nrows() {
        return Err(Error::dims("response", x.nrows(), y.len()));
    }
    let lipschitz = max_gram_eigenvalue(x)?;
    let lambda_o = pen.lambda_o();

    let mut point = evaluate(data, &beta, pen);
    let mut iters = 0;

    if lipschitz > 0.0 {
        let step = 1.0 / lipschitz;
        let mut z = beta.clone();
        let mut t = 1.0_f64;
        while point.kkt > config.kkt_tol && iters < config.max_sweeps {
            iters += 1;
            let grad = huber_gradient_from_residual(x, &(y - x * &z), lambda_o);
            let next = (&z - grad * step).map(|v| soft_threshold(v, pen.lambda_s() * step));

            // Restart momentum when the step opposes the previous direction.
            let restart = (&z - &next).dot(&(&next - &beta)) > 0.0;
            let t_next = if restart { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
            let momentum = if restart { 0.0 } else { (t - 1.0) / t_next };
            z = &next + (&next - &beta) * momentum;
            t = t_next;
            beta = next;
            point = evaluate(data, &beta, pen);
        }
    }

    let sqrt_n = (data.n() as f64).sqrt();
    let mut r = y - x * &beta;
    r.axpy(-sqrt_n, &point.theta, 1.0);
    Ok(FitResult {
        objective: augmented_from_residual(&r, &beta, &point.theta, pen),
        kkt_residual: point.kkt,
        converged: point.kkt <= config.kkt_tol,
        sweeps_used: iters,
        beta_hat: beta,
        theta_hat: point.theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate, make_beta, standard_normal_rows, ContaminationSpec, CovarianceModel};
    use crate::rng::rng_from_seed;
    use crate::solver::{fit_cd, objective_huber};

    #[test]
    fn zero_response_gives_zero_beta() {
        let x = standard_normal_rows(12, 3, &mut rng_from_seed(1));
        let data = Dataset::new(x, DVector::zeros(12)).unwrap();
        let fit = fit_prox(&data, &PenaltyPair::equal(0.3).unwrap(), &SolverConfig::default()).unwrap();
        assert_eq!(fit.beta_hat, DVector::zeros(3));
        assert!(fit.converged);
    }

    #[test]
    fn agrees_with_coordinate_descent() {
        let beta = make_beta(15, 4, 2.0).unwrap();
        let spec = ContaminationSpec::fixed_shift(5, 4.0);
        let data = generate(40, 15, &CovarianceModel::Identity, &beta, 1.0, &spec, &mut rng_from_seed(8)).unwrap();
        let pen = PenaltyPair::new(0.1, 0.3).unwrap();
        let cfg = SolverConfig::default();
        let a = fit_cd(&data, &pen, &cfg).unwrap();
        let b = fit_prox(&data, &pen, &cfg).unwrap();
        assert!(a.converged && b.converged);
        assert!((&a.beta_hat - &b.beta_hat).amax() <= 1e-6);
        let fa = objective_huber(&data.x, &data.y, &a.beta_hat, &pen).unwrap();
        let fb = objective_huber(&data.x, &data.y, &b.beta_hat, &pen).unwrap();
        assert!(fb <= fa + 1e-9 && fa <= fb + 1e-9);

        let warm = fit_prox_from(&data, &pen, &cfg, &a).unwrap();
        assert!(warm.converged);
        assert!(warm.sweeps_used <= 5);
    }

    #[test]
    fn all_zero_design() {
        let data = Dataset::new(nalgebra::DMatrix::zeros(5, 2), DVector::from_element(5, 1.0)).unwrap();
        let fit = fit_prox(&data, &PenaltyPair::equal(0.1).unwrap(), &SolverConfig::default()).unwrap();
        assert_eq!(fit.beta_hat, DVector::zeros(2));
        assert!(fit.converged);
    }
}
