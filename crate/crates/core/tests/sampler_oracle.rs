//! Cross-validation of the two samplers against the exact chain: empirical
//! absorption frequencies against the linear-solve oracle, and the
//! configuration-level against the agent-level sampler.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plurality_core::config::{AgentStates, ColorConfiguration};
use plurality_core::dynamics::{run, step, step_agentwise, RunParams};
use plurality_core::oracle::{exact_absorption, AbsorbingState};
use plurality_core::trace::Outcome;

#[test]
fn empirical_absorption_matches_exact_solve() {
    let config = ColorConfiguration::new(&[1, 1], 0).unwrap();
    let report = exact_absorption(&config, None).unwrap();
    let p1 = report.probability_of(AbsorbingState::Monochromatic { label: 1 });
    let p2 = report.probability_of(AbsorbingState::Monochromatic { label: 2 });
    let ps = report.probability_of(AbsorbingState::AllUndecided);

    let params = RunParams {
        max_rounds: 10_000,
        record_every: 1_000_000,
        alpha_hint: 0.0,
        seed: 0,
    };
    let reps = 100_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(0xAB);
    let (mut w1, mut w2, mut stall) = (0u64, 0u64, 0u64);
    for _ in 0..reps {
        match run(&config, &params, &mut rng).outcome {
            Outcome::PluralityWin { winner: 1 } | Outcome::OtherWin { winner: 1 } => w1 += 1,
            Outcome::PluralityWin { winner: 2 } | Outcome::OtherWin { winner: 2 } => w2 += 1,
            Outcome::AllUndecidedStall => stall += 1,
            other => panic!("unexpected outcome {other:?}"),
        }
    }
    let f = reps as f64;
    assert!((w1 as f64 / f - p1).abs() <= 0.01, "color 1: {} vs {p1}", w1 as f64 / f);
    assert!((w2 as f64 / f - p2).abs() <= 0.01, "color 2: {} vs {p2}", w2 as f64 / f);
    assert!((stall as f64 / f - ps).abs() <= 0.01, "stall: {} vs {ps}", stall as f64 / f);
}

#[test]
fn configuration_and_agent_samplers_agree_in_distribution() {
    // two-sample total variation over 10^5 draws each
    let config = ColorConfiguration::new(&[3, 2, 1], 2).unwrap();
    let states = AgentStates::from_configuration(&config);
    let reps = 100_000u64;

    let mut freq_config: HashMap<(Vec<u64>, u64), i64> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..reps {
        let next = step(&config, &mut rng);
        *freq_config.entry((next.counts_by_label(), next.undecided())).or_default() += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..reps {
        let next = step_agentwise(&states, &mut rng).to_configuration(3).unwrap();
        *freq_config.entry((next.counts_by_label(), next.undecided())).or_default() -= 1;
    }
    let tv = freq_config.values().map(|&d| d.unsigned_abs()).sum::<u64>() as f64
        / (2.0 * reps as f64);
    assert!(tv <= 0.02, "two-sample TV = {tv:.4}");
}
