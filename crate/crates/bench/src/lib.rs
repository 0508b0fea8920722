//! Fixtures shared by the criterion benchmarks.

use auglasso::cert::CertDesign;
use auglasso::model::sample_design;
use auglasso::{generate, make_beta, rng_from_seed, ContaminationSpec, CovarianceModel, DMatrix, Dataset, PenaltyPair};

/// A contaminated regression problem with penalties from the experiment rule.
pub fn regression_problem(n: usize, p: usize, s: usize, o: usize, seed: u64) -> (Dataset, PenaltyPair) {
    let beta = make_beta(p, s, 10.0).expect("s <= p");
    let data = generate(
        n,
        p,
        &CovarianceModel::Ar1 { rho: 0.5 },
        &beta,
        1.0,
        &ContaminationSpec::fixed_shift(o, 10.0),
        &mut rng_from_seed(seed),
    )
    .expect("valid problem");
    let pen = auglasso::tuning::lambda_experiment(n, p, s, o.max(1)).expect("nondegenerate penalties");
    (data, pen)
}

/// A standard Gaussian design prepared for certification.
pub fn gaussian_design(n: usize, p: usize, seed: u64) -> CertDesign {
    let sigma = DMatrix::identity(p, p);
    let x = sample_design(n, &sigma, &mut rng_from_seed(seed)).expect("n >= 1");
    CertDesign::new(&x, &sigma).expect("identity covariance")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shape() {
        let (data, _) = regression_problem(50, 8, 2, 5, 1);
        assert_eq!((data.n(), data.p()), (50, 8));
        let d = gaussian_design(30, 4, 1);
        assert_eq!((d.n(), d.p()), (30, 4));
    }
}
