//! Stochastic simulation of the undecided-state update rule on the
//! complete graph: one synchronous round at configuration level (fast)
//! or agent level (reference), and full runs producing traces.
//!
//! Every agent samples a uniformly random agent out of all n (self
//! included; a self-sample is a no-op under the update rule, and this
//! choice matches the /n denominators of the expectation formulas) and
//! transitions: colored agents keep their color against the same color
//! or an undecided partner and turn undecided against a different
//! color; undecided agents adopt any color they see.

use rand::Rng;

use crate::config::{AgentStates, ColorConfiguration, UNDECIDED};
use crate::error::Result;
use crate::sampling::{binomial, multinomial};
use crate::trace::{Outcome, RunTrace, TraceRow};

/// Parameters of a simulated run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunParams {
    pub max_rounds: u64,
    /// Sampling stride for trace rows; rounds 0, 1 and the final round are
    /// always recorded.
    pub record_every: u64,
    /// Bias parameter used by per-row drift diagnostics (not by the sampler).
    pub alpha_hint: f64,
    pub seed: u64,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            max_rounds: 10_000,
            record_every: 1,
            alpha_hint: 0.0,
            seed: 0,
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds < 1 {
            return Err(crate::error::Error::Parameter(
                "max_rounds must be >= 1".into(),
            ));
        }
        if self.record_every < 1 {
            return Err(crate::error::Error::Parameter(
                "record_every must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One synchronous round at configuration level.
///
/// For each color class the stayers follow `Binomial(c_i, (c_i + q)/n)`
/// (the rest turn undecided); the undecided class splits across the k
/// colors and itself with a full multinomial. The resulting law over next
/// configurations equals that of n independent per-agent draws, so the
/// componentwise expectation is exactly `expected_next`.
pub fn step<R: Rng + ?Sized>(config: &ColorConfiguration, rng: &mut R) -> ColorConfiguration {
    let n = config.n();
    debug_assert!(n >= 1);
    let nf = n as f64;
    let q = config.undecided();
    let by_label = config.counts_by_label();
    let k = by_label.len();

    let mut next = vec![0u64; k];
    let mut next_q = 0u64;

    for (i, &c) in by_label.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let stay = binomial(rng, c, (c + q) as f64 / nf);
        next[i] += stay;
        next_q += c - stay;
    }

    if q > 0 {
        let mut probs: Vec<f64> = by_label.iter().map(|&c| c as f64 / nf).collect();
        probs.push(q as f64 / nf);
        let split = multinomial(rng, q, &probs);
        for (i, &adopt) in split[..k].iter().enumerate() {
            next[i] += adopt;
        }
        next_q += split[k];
    }

    ColorConfiguration::new(&next, next_q).expect("step preserves n >= 1")
}

/// The update rule applied by an agent in state `own` that observed
/// `partner`: undecided agents adopt whatever they see, colored agents
/// survive their own color or an undecided partner and turn undecided
/// against a different color.
pub fn update_rule(own: u32, partner: u32) -> u32 {
    if own == UNDECIDED {
        partner
    } else if partner == UNDECIDED || partner == own {
        own
    } else {
        UNDECIDED
    }
}

/// One synchronous round at agent level; marginally identical to `step`.
pub fn step_agentwise<R: Rng + ?Sized>(states: &AgentStates, rng: &mut R) -> AgentStates {
    let n = states.len();
    debug_assert!(n >= 1);
    let old = states.as_slice();
    let mut next = Vec::with_capacity(n);
    for &own in old {
        let partner = old[rng.random_range(0..n)];
        next.push(update_rule(own, partner));
    }
    AgentStates::from_raw(next)
}

/// Runs the chain until it is monochromatic, all undecided, or
/// `max_rounds` is reached. Deterministic given the random source.
///
/// `q > 0` starts are allowed (mid-trajectory restarts) but flagged, since
/// the canonical process begins fully colored.
pub fn run<R: Rng + ?Sized>(
    config: &ColorConfiguration,
    params: &RunParams,
    rng: &mut R,
) -> RunTrace {
    if config.undecided() > 0 {
        log::warn!(
            "run starting from q = {} > 0; outcome statistics assume q = 0 starts",
            config.undecided()
        );
    }
    let initial_plurality = config.plurality_label();
    let mut trace = RunTrace {
        rows: Vec::new(),
        outcome: Outcome::Timeout,
        convergence_round: None,
        n: config.n(),
        k: config.k() as u32,
        initial_plurality_label: initial_plurality,
        md0: config.monochromatic_distance().ok(),
        r0: config.support_ratio().ok(),
        rr0: config.effective_colors().ok(),
        seed: params.seed,
    };

    let mut current = config.clone();
    let mut round = 0u64;
    trace
        .rows
        .push(TraceRow::from_configuration(0, &current, params.alpha_hint));

    loop {
        if let Some(outcome) = classify_absorbed(&current, initial_plurality) {
            trace.outcome = outcome;
            trace.convergence_round = Some(round);
            break;
        }
        if round >= params.max_rounds {
            trace.outcome = Outcome::Timeout;
            break;
        }
        current = step(&current, rng);
        round += 1;
        let absorbed_now = classify_absorbed(&current, initial_plurality).is_some();
        if round == 1 || round % params.record_every == 0 || absorbed_now {
            trace
                .rows
                .push(TraceRow::from_configuration(round, &current, params.alpha_hint));
        }
    }

    // the final simulated round is always present
    if trace.rows.last().map(|r| r.round) != Some(round) {
        trace
            .rows
            .push(TraceRow::from_configuration(round, &current, params.alpha_hint));
    }
    trace
}

/// Exact standard deviation of each coordinate of one synchronous round,
/// per color (by rank, like `expected_next`) and for the undecided count.
/// Used to calibrate sampler-validation bands.
pub fn step_std_dev(config: &ColorConfiguration) -> (Vec<f64>, f64) {
    let n = config.n() as f64;
    let q = config.undecided() as f64;
    let mut var_q = q * (q / n) * (1.0 - q / n);
    let mut per_color = Vec::with_capacity(config.k());
    for &c in config.counts() {
        let c = c as f64;
        let p_stay = (c + q) / n;
        let p_adopt = c / n;
        per_color.push((c * p_stay * (1.0 - p_stay) + q * p_adopt * (1.0 - p_adopt)).sqrt());
        var_q += c * p_stay * (1.0 - p_stay);
    }
    (per_color, var_q.sqrt())
}

/// Outcome when the configuration is absorbing, else `None`.
pub fn classify_absorbed(
    config: &ColorConfiguration,
    initial_plurality: u32,
) -> Option<Outcome> {
    if config.is_monochromatic() {
        let winner = config.plurality_label();
        Some(if winner == initial_plurality {
            Outcome::PluralityWin { winner }
        } else {
            Outcome::OtherWin { winner }
        })
    } else if config.is_all_undecided() {
        Some(Outcome::AllUndecidedStall)
    } else {
        None
    }
}
