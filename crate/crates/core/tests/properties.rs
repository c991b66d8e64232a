use hlpush::exact::single_particle_pmf;
use hlpush::fredholm::q_pochhammer_inf_real;
use hlpush::observables::{classify_regime, height_duality_holds, ks_distance, rescale_fluctuations};
use hlpush::particle_system::{run_until, Configuration, JumpLaw};
use hlpush::rng::replica_rng;
use proptest::prelude::*;

fn positions() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(0u64..60, 1..12).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dynamics_keep_order_and_only_move_right(
        x in positions(),
        b in 0.05f64..0.95,
        t in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let law = JumpLaw::new(b).unwrap();
        let mut config = Configuration::new(x.clone()).unwrap();
        run_until(&mut config, &law, t, &mut replica_rng(seed, 0)).unwrap();
        prop_assert_eq!(config.len(), x.len());
        prop_assert!(config.positions.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(config.positions.iter().zip(&x).all(|(after, before)| after >= before));
        prop_assert!(height_duality_holds(&config));
    }

    #[test]
    fn runs_are_reproducible(x in positions(), seed in any::<u64>(), replica in 0u64..1000) {
        let law = JumpLaw::new(0.5).unwrap();
        let run = || {
            let mut c = Configuration::new(x.clone()).unwrap();
            run_until(&mut c, &law, 2.0, &mut replica_rng(seed, replica)).unwrap();
            c.positions
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn single_particle_law_is_a_distribution(t in 0.0f64..3.0, b in 0.05f64..0.9) {
        let p: Vec<f64> = (0..400).map(|k| single_particle_pmf(t, k, b)).collect();
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        // Mean of a compound Poisson with Geometric(1−b) jumps.
        let mean: f64 = p.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
        prop_assert!((mean - t / (1.0 - b)).abs() < 1e-8);
    }

    #[test]
    fn q_pochhammer_shift_identity(a in -5.0f64..0.99, q in 0.05f64..0.9) {
        let lhs = q_pochhammer_inf_real(a, q);
        let rhs = (1.0 - a) * q_pochhammer_inf_real(a * q, q);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn rescaling_is_affine(t in 1.0f64..1e4, n in 0.0f64..1e4) {
        let c = classify_regime(4.0, 0.5, 1.0).unwrap();
        let sigma = c.sigma_nu.unwrap();
        let r = rescale_fluctuations(&[(t, n), (t, n + sigma * t.cbrt()), (t, c.m_nu * t)], &c).unwrap();
        prop_assert!((r[1] - (r[0] - 1.0)).abs() < 1e-9);
        prop_assert!(r[2].abs() < 1e-9);
    }

    #[test]
    fn ks_distance_is_a_probability(xs in prop::collection::vec(-10.0f64..10.0, 1..50)) {
        let d = ks_distance(&xs, |x| 1.0 / (1.0 + (-x).exp()));
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(d >= 0.5 / xs.len() as f64 - 1e-15);
    }
}
