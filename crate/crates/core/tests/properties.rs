//! Property tests for the structural invariants: conservation laws,
//! metric bounds, the drift inequality, and label bookkeeping.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plurality_core::config::ColorConfiguration;
use plurality_core::dynamics::step;
use plurality_core::oracle::{exact_step_distribution, CapacityGuard};

fn arb_counts() -> impl Strategy<Value = (Vec<u64>, u64)> {
    (
        prop::collection::vec(0u64..5_000, 1..12),
        0u64..5_000,
    )
        .prop_filter("at least one agent", |(counts, q)| {
            counts.iter().sum::<u64>() + q > 0
        })
}

fn arb_colored() -> impl Strategy<Value = (Vec<u64>, u64)> {
    arb_counts().prop_filter("some colored agent", |(counts, _)| {
        counts.iter().any(|&c| c > 0)
    })
}

proptest! {
    #[test]
    fn conservation_and_label_permutation((counts, q) in arb_counts()) {
        let config = ColorConfiguration::new(&counts, q).unwrap();
        prop_assert_eq!(config.counts().iter().sum::<u64>() + config.undecided(), config.n());

        // unsorting then resorting is the identity on the multiset
        let by_label = config.counts_by_label();
        prop_assert_eq!(&by_label, &counts);
        let again = ColorConfiguration::new(&by_label, q).unwrap();
        prop_assert_eq!(again.counts(), config.counts());

        // sorted non-increasing
        prop_assert!(config.counts().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn metric_bounds((counts, q) in arb_colored()) {
        let config = ColorConfiguration::new(&counts, q).unwrap();
        let k = config.k() as f64;
        let r = config.support_ratio().unwrap();
        let md = config.monochromatic_distance().unwrap();
        let rr = config.effective_colors().unwrap();
        prop_assert!((1.0..=k + 1e-9).contains(&r), "R = {r}");
        prop_assert!((1.0..=k + 1e-9).contains(&md), "md = {md}");
        prop_assert!(rr <= k + 1e-9, "rr = {rr}");

        // md = 1 exactly when a single color holds all colored agents
        let nonzero = config.counts().iter().filter(|&&c| c > 0).count();
        if nonzero == 1 {
            prop_assert!((md - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(md > 1.0);
        }
    }

    #[test]
    fn expectation_conserves_mass((counts, q) in arb_counts()) {
        let config = ColorConfiguration::new(&counts, q).unwrap();
        let e = config.expected_next();
        let total = e.mu.iter().sum::<f64>() + e.mu_q;
        prop_assert!((total - config.n() as f64).abs() <= 1e-9 * config.n() as f64);
        prop_assert!(e.mu.iter().all(|&m| m >= 0.0) && e.mu_q >= 0.0);
    }

    #[test]
    fn drift_inequality_exact(
        (counts, q) in arb_colored(),
        alpha in 0.01f64..4.0,
    ) {
        let config = ColorConfiguration::new(&counts, q).unwrap();
        let drift = config.plurality_drift(alpha).unwrap();
        if drift.hypothesis_holds {
            let e = config.expected_next();
            let lhs = (e.mu[0] + 2.0 * e.mu_q) / config.n() as f64;
            prop_assert!(
                lhs + 1e-9 >= 1.0 + drift.value,
                "lhs {lhs} < 1 + {g}", g = drift.value
            );
        }
        prop_assert!(drift.value >= 0.0);
    }

    #[test]
    fn step_conserves_population(
        (counts, q) in arb_counts(),
        seed in 0u64..1_000,
    ) {
        let config = ColorConfiguration::new(&counts, q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let next = step(&config, &mut rng);
        prop_assert_eq!(next.n(), config.n());
        prop_assert_eq!(next.k(), config.k());
    }

    #[test]
    fn oracle_marginals_match_expectation(
        counts in prop::collection::vec(0u64..5, 1..4),
        q in 0u64..5,
        )
    {
        prop_assume!(counts.iter().sum::<u64>() + q > 0);
        let config = ColorConfiguration::new(&counts, q).unwrap();
        let guard = CapacityGuard::default();
        if guard.check(&config).is_ok() {
            let dist = exact_step_distribution(&config).unwrap();
            let (mean, mean_q) = dist.mean_counts();
            let e = config.expected_next();
            let tol = 1e-9 * config.n() as f64;
            // expected_next is rank-ordered; compare in label order
            for (rank, &mu) in e.mu.iter().enumerate() {
                let label = config.label_of_rank(rank) as usize - 1;
                prop_assert!((mean[label] - mu).abs() <= tol);
            }
            prop_assert!((mean_q - e.mu_q).abs() <= tol);
            prop_assert!((dist.total_mass() - 1.0).abs() <= 1e-9);
        }
    }
}
