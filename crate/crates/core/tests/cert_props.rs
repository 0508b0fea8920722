use auglasso::cert::{
    atp_slack, check_ip, combine_atp, gaussian_width_b1, ip_slack, tp_slack, AtpConstants, CertDesign, IpConstants,
    SamplerSpec, TpConstants,
};
use auglasso::{rng_from_seed, DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn design(n: usize, p: usize, seed: u64) -> (DMatrix<f64>, CertDesign) {
    let mut rng = rng_from_seed(seed);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    let d = CertDesign::new(&x, &DMatrix::identity(p, p)).unwrap();
    (x, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn atp_without_u_is_tp(
        n in 5usize..40, p in 1usize..10, seed in any::<u64>(),
        c in (0.01f64..1.0, 0.0f64..0.5, 0.0f64..0.5),
        v in prop::collection::vec(-3.0f64..3.0, 10),
    ) {
        let (_, d) = design(n, p, seed);
        let atp = AtpConstants::new(c.0, c.1, c.2).unwrap();
        let v = DVector::from_iterator(p, v.into_iter().take(p));
        let gap = atp_slack(&d, &atp, &v, &DVector::zeros(n)) - tp_slack(&d, &atp.as_tp(), &v);
        prop_assert!(gap.abs() <= 1e-12);
    }

    #[test]
    fn ip_passes_with_b1_folded_into_b3(
        n in 5usize..40, p in 1usize..10, seed in any::<u64>(),
        b in (0.0f64..0.5, 0.0f64..0.5, 0.0f64..0.5),
    ) {
        let (_, d) = design(n, p, seed);
        let tight = IpConstants::new(b.0, b.1, b.2).unwrap();
        let loose = IpConstants::new(0.0, b.1, b.0 + b.2).unwrap();
        let mut rng = rng_from_seed(seed ^ 1);
        for _ in 0..20 {
            let v = DVector::from_fn(p, |_, _| rng.sample(StandardNormal));
            let u = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
            if ip_slack(&d, &tight, &v, &u) >= 0.0 {
                prop_assert!(ip_slack(&d, &loose, &v, &u) >= 0.0);
            }
        }
        // Same statement at the level of reports on identical sample streams.
        let spec = SamplerSpec::without_refinement();
        let a = check_ip(&d, &tight, &spec, 100, &mut rng_from_seed(seed)).unwrap();
        let b = check_ip(&d, &loose, &spec, 100, &mut rng_from_seed(seed)).unwrap();
        if !a.violated() {
            prop_assert!(!b.violated());
        }
    }

    #[test]
    fn smallest_singular_value_is_exact_tp_constant(n in 12usize..40, p in 1usize..10, seed in any::<u64>()) {
        let (x, d) = design(n, p, seed);
        let svd = (&x / (n as f64).sqrt()).svd(false, true);
        let k = svd.singular_values.imin();
        let exact = TpConstants::new(svd.singular_values[k], 0.0).unwrap();
        let vmin = svd.v_t.unwrap().row(k).transpose();
        prop_assert!(tp_slack(&d, &exact, &vmin).abs() <= 1e-8);
        let mut rng = rng_from_seed(seed ^ 2);
        for _ in 0..20 {
            let v = DVector::from_fn(p, |_, _| rng.sample(StandardNormal));
            prop_assert!(tp_slack(&d, &exact, &v) >= -1e-10 * v.norm().max(1.0));
        }
    }

    #[test]
    fn combine_is_monotone_in_alpha(a1 in 0.5f64..1.0, a2 in 0.0f64..0.2, b in (0.0f64..0.2, 0.01f64..0.2, 0.01f64..0.2), f in 0.05f64..0.45) {
        let tp = TpConstants::new(a1, a2).unwrap();
        let ip = IpConstants::new(b.0, b.1, b.2).unwrap();
        let top = (a1 * a1 - b.0).sqrt();
        let lo = combine_atp(&tp, &ip, f * top).unwrap();
        let hi = combine_atp(&tp, &ip, (f + 0.5) * top).unwrap();
        // Raising α costs curvature (c1) and buys smaller ℓ1 penalties (c2, c3 carry 1/α).
        prop_assert!(hi.c1 < lo.c1);
        prop_assert!(hi.c2 < lo.c2 && hi.c3 < lo.c3);
    }
}

#[test]
fn width_estimates_agree_across_seeds() {
    let sigma = DMatrix::<f64>::from_fn(20, 20, |i, j| 0.5f64.powi(i.abs_diff(j) as i32));
    let a = gaussian_width_b1(&sigma, 4000, &mut rng_from_seed(1)).unwrap();
    let b = gaussian_width_b1(&sigma, 4000, &mut rng_from_seed(2)).unwrap();
    assert!((a.estimate - b.estimate).abs() <= 4.0 * a.std_error.max(b.std_error));
}
