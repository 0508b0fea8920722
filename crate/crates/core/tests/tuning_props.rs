use auglasso::tuning::{lambda_experiment_value, lambda_theorem3, NoiseModel};
use proptest::prelude::*;

proptest! {
    #[test]
    fn theorem3_decreases_in_n_and_scales_in_sigma(p in 2usize..500, sigma in 0.1f64..5.0, delta in 0.01f64..0.5) {
        let noise = NoiseModel::new(sigma, delta).unwrap();
        let small = lambda_theorem3(100, p, &noise).unwrap();
        let mid = lambda_theorem3(400, p, &noise).unwrap();
        let big = lambda_theorem3(1600, p, &noise).unwrap();
        prop_assert!(small.lambda_s() > mid.lambda_s() && mid.lambda_s() > big.lambda_s());
        prop_assert!(small.lambda_o() > mid.lambda_o() && mid.lambda_o() > big.lambda_o());
        let unit = lambda_theorem3(400, p, &NoiseModel::new(1.0, delta).unwrap()).unwrap();
        prop_assert!((mid.lambda_s() - sigma * unit.lambda_s()).abs() <= 1e-12 * mid.lambda_s());
    }

    #[test]
    fn experiment_rule_is_symmetric(
        a in prop::sample::select(vec![1usize, 2, 4, 5, 8, 10, 16, 20, 25]),
        b in prop::sample::select(vec![1usize, 2, 4, 5, 8, 10, 16, 20, 25]),
        k in 1usize..5,
    ) {
        // Exchange p/s and n/o at fixed n.
        let n = 400 * k;
        let lhs = lambda_experiment_value(n, a * 10, 10, n / b).unwrap();
        let rhs = lambda_experiment_value(n, b * 10, 10, n / a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
    }
}
