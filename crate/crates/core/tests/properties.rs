use gaussian_pnr::decompositions::{
    diagonal_representative, is_pure, normal_parameters, validate_normal_parameters, CLUSTER_TOL,
};
use gaussian_pnr::inverse::same_distribution;
use gaussian_pnr::photon::{
    antinormal_moments_from_params, g_closed, moment_convert, photon_distribution, DistributionConfig, Ordering,
};
use gaussian_pnr::random::{random_orthosymplectic, random_physical_state, ParamSampler};
use gaussian_pnr::{NormalParameters, TruncatedSeries};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORDER: usize = 12;

fn series(c0: std::ops::Range<f64>) -> impl Strategy<Value = TruncatedSeries> {
    (c0, prop::collection::vec(-1.0..1.0f64, ORDER)).prop_map(|(a, rest)| {
        let mut c = vec![a];
        c.extend(rest);
        TruncatedSeries::new(c)
    })
}

fn close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

fn sampled_params(seed: u64) -> NormalParameters {
    ParamSampler::default().sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_product_is_a_commutative_ring(a in series(-2.0..2.0), b in series(-2.0..2.0), c in series(-2.0..2.0)) {
        let ab = a.mul(&b).unwrap();
        prop_assert!(close(&ab, &b.mul(&a).unwrap(), 1e-12));
        prop_assert!(close(&ab.mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap(), 1e-10));
        let lhs = a.mul(&(&b + &c)).unwrap();
        let rhs = &ab + &a.mul(&c).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
        prop_assert!(close(&a.mul(&TruncatedSeries::one(ORDER)).unwrap(), &a, 0.0));
    }

    #[test]
    fn exp_turns_sums_into_products(a in series(-1.0..1.0), b in series(-1.0..1.0)) {
        let lhs = (&a + &b).exp().unwrap();
        let rhs = a.exp().unwrap().mul(&b.exp().unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-11));
    }

    #[test]
    fn ln_inverts_exp_and_division_inverts_product(a in series(-1.0..1.0), b in series(0.5..2.0)) {
        prop_assert!(close(&a.exp().unwrap().ln().unwrap(), &a, 1e-9));
        prop_assert!(close(&a.mul(&b).unwrap().div(&b).unwrap(), &a, 1e-8));
    }

    #[test]
    fn distributions_are_normalized(seed in any::<u64>()) {
        let f = sampled_params(seed);
        let p = photon_distribution(&f, &DistributionConfig::default()).unwrap();
        prop_assert!(p.probs().iter().all(|&q| q >= -1e-15));
        let mass: f64 = p.probs().iter().sum();
        prop_assert!((mass + p.tail_bound() - 1.0).abs() < 1e-10, "mass {mass}, tail {}", p.tail_bound());
    }

    #[test]
    fn pgf_agrees_with_closed_form_generating_function(seed in any::<u64>(), z in 0.5..4.0f64) {
        // G(z) = Σ pₙ (1+z)^{−n} / (1+z)^S
        let f = sampled_params(seed);
        let p = photon_distribution(&f, &DistributionConfig::default()).unwrap();
        let w = 1.0 / (1.0 + z);
        let pgf: f64 = p.probs().iter().rev().fold(0.0, |acc, &q| acc * w + q);
        let expected = g_closed(&f, z).unwrap();
        prop_assert!((pgf * w.powi(f.modes() as i32) - expected).abs() < 1e-10 * expected.max(1e-300) + 1e-12);
    }

    #[test]
    fn passive_transformations_leave_the_distribution_unchanged(seed in any::<u64>(), modes in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, _) = random_physical_state(modes, 4.0, 0.6, &mut rng);
        let rotated = state.apply_symplectic(&random_orthosymplectic(modes, &mut rng)).unwrap();
        let cfg = DistributionConfig { nmax: Some(25), ..Default::default() };
        let a = photon_distribution(&normal_parameters(&state, CLUSTER_TOL), &cfg).unwrap();
        let b = photon_distribution(&normal_parameters(&rotated, CLUSTER_TOL), &cfg).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-11);
    }

    #[test]
    fn physical_states_satisfy_the_pairing_condition(seed in any::<u64>(), modes in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, nu) = random_physical_state(modes, 4.0, 0.6, &mut rng);
        let f = normal_parameters(&state, CLUSTER_TOL);
        let report = validate_normal_parameters(&f);
        prop_assert!(report.valid, "{:?}", report.failures);
        // pure states pair tightly
        let pure = nu.iter().all(|&v| v == 1.0);
        prop_assert_eq!(is_pure(state.cov(), 1e-8).pure, pure);
    }

    #[test]
    fn same_distribution_is_an_equivalence(seed in any::<u64>(), modes in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _) = random_physical_state(modes, 4.0, 0.6, &mut rng);
        let b = a.apply_symplectic(&random_orthosymplectic(modes, &mut rng)).unwrap();
        let c = b.apply_symplectic(&random_orthosymplectic(modes, &mut rng)).unwrap();
        let tol = 1e-8;
        prop_assert!(same_distribution(&a, &a, tol));
        prop_assert_eq!(same_distribution(&a, &b, tol), same_distribution(&b, &a, tol));
        prop_assert!(same_distribution(&a, &b, tol) && same_distribution(&b, &c, tol) && same_distribution(&a, &c, tol));
        let mut shifted = a.disp().clone();
        shifted[0] += 0.5;
        let d = a.with_displacement(shifted).unwrap();
        prop_assert!(!same_distribution(&a, &d, tol));
    }

    #[test]
    fn diagonal_representative_round_trips(seed in any::<u64>()) {
        let f = sampled_params(seed);
        let state = diagonal_representative(&f).unwrap();
        prop_assert!(normal_parameters(&state, CLUSTER_TOL).approx_eq(&f, 1e-12, 1e-12));
    }

    #[test]
    fn moment_conversion_round_trips(seed in any::<u64>()) {
        let f = sampled_params(seed);
        let m = antinormal_moments_from_params(&f, 6).unwrap();
        let back = moment_convert(&moment_convert(&m, Ordering::Ordinary), Ordering::Antinormal);
        for (x, y) in m.values.iter().zip(&back.values) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}
