use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rffa::gev::GevParams;
use rffa::prediction::mixture_quantile;
use rffa::validation::{mean_quantile_score, pit_value, pp_plot_data, quantile_score, BootstrapConfig, HoldoutPrediction};

fn component() -> impl Strategy<Value = GevParams<f64>> {
    (-10.0..10.0f64, 0.2..5.0f64, -0.3..0.3f64).prop_map(|(m, k, x)| GevParams::new(m, k, x).unwrap())
}

proptest! {
    #[test]
    fn quantile_score_nonnegative(q in -100.0..100.0f64, y in -100.0..100.0f64, tau in 0.001..0.999f64) {
        let s = quantile_score(q, y, tau);
        prop_assert!(s >= 0.0);
        prop_assert_eq!(s == 0.0, q == y);
    }

    #[test]
    fn score_interval_contains_mean(
        q in 0.0..10.0f64,
        ys in prop::collection::vec(0.0..20.0f64, 1..60),
        seed in 0u64..1000,
        by_station in any::<bool>(),
    ) {
        let preds = [HoldoutPrediction { station_id: "a".into(), quantile: q, observations: ys }];
        let boot = BootstrapConfig { n_resamples: 200, seed, by_station, ..Default::default() };
        let r = mean_quantile_score("m", &preds, 50.0, &boot).unwrap();
        prop_assert!(r.ci_lo <= r.mean_score && r.mean_score <= r.ci_hi);
    }

    #[test]
    fn pit_is_a_probability(comps in prop::collection::vec(component(), 1..6), y in -50.0..50.0f64) {
        let p = pit_value(&comps, y);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn predictive_quantile_monotone_in_prob(comps in prop::collection::vec(component(), 1..5), seed in 0u64..100) {
        let qs: Vec<f64> = [0.5, 0.9, 0.98, 0.99, 0.999]
            .iter()
            .map(|&p| mixture_quantile(&comps, p, 20, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap())
            .collect();
        prop_assert!(qs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pp_positions_and_gap(pits in prop::collection::vec(0.0..=1.0f64, 1..200)) {
        let pp = pp_plot_data(&pits).unwrap();
        let n = pits.len() as f64;
        for (i, pt) in pp.points.iter().enumerate() {
            prop_assert!((pt.theoretical - (i + 1) as f64 / (n + 1.0)).abs() < 1e-15);
        }
        prop_assert!(pp.points.windows(2).all(|w| w[0].empirical <= w[1].empirical));
        prop_assert!((0.0..1.0).contains(&pp.max_gap));
    }
}
