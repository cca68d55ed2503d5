//! Full runs of the token-based dynamics on a regular graph: one update
//! rule application per phase, iterated to absorption, plus the
//! concentration bound the measured congestion is audited against.

use rand::Rng;

use crate::config::AgentStates;
use crate::dynamics::classify_absorbed;
use crate::error::{Error, Result};
use crate::expander::graph::RegularGraph;
use crate::expander::phase::{run_phase, PhaseParams, PhaseStats};
use crate::trace::{Outcome, PhaseSummary, RunTrace, TraceRow};

/// Run parameters for the phase-based protocol; `max_phases` bounds the
/// number of 2-tau phases.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExpanderRunParams {
    pub max_phases: u64,
    pub record_every: u64,
    pub alpha_hint: f64,
    pub seed: u64,
}

impl Default for ExpanderRunParams {
    fn default() -> Self {
        ExpanderRunParams {
            max_phases: 500,
            record_every: 1,
            alpha_hint: 0.0,
            seed: 0,
        }
    }
}

/// Iterates token phases until the population is monochromatic, all
/// undecided, or the phase budget is exhausted. Trace rows are per phase
/// (the `round` column counts phases) and carry that phase's congestion
/// summary; the full per-phase stats are returned alongside.
pub fn run_expander<R: Rng + ?Sized>(
    graph: &RegularGraph,
    states: &AgentStates,
    k: usize,
    phase: &PhaseParams,
    params: &ExpanderRunParams,
    rng: &mut R,
) -> Result<(RunTrace, Vec<PhaseStats>)> {
    phase.validate()?;
    if params.record_every < 1 {
        return Err(Error::Parameter("record_every must be >= 1".into()));
    }
    let mut current = states.clone();
    let mut config = current.to_configuration(k)?;
    let initial_plurality = config.plurality_label();

    let mut trace = RunTrace {
        rows: Vec::new(),
        outcome: Outcome::Timeout,
        convergence_round: None,
        n: config.n(),
        k: k as u32,
        initial_plurality_label: initial_plurality,
        md0: config.monochromatic_distance().ok(),
        r0: config.support_ratio().ok(),
        rr0: config.effective_colors().ok(),
        seed: params.seed,
    };
    trace
        .rows
        .push(TraceRow::from_configuration(0, &config, params.alpha_hint));

    let mut all_stats = Vec::new();
    let mut phase_idx = 0u64;
    loop {
        if let Some(outcome) = classify_absorbed(&config, initial_plurality) {
            trace.outcome = outcome;
            trace.convergence_round = Some(phase_idx);
            break;
        }
        if phase_idx >= params.max_phases {
            trace.outcome = Outcome::Timeout;
            break;
        }
        let (next, stats) = run_phase(graph, &current, phase, rng)?;
        current = next;
        config = current.to_configuration(k)?;
        phase_idx += 1;

        let absorbed_now = classify_absorbed(&config, initial_plurality).is_some();
        if phase_idx == 1 || phase_idx % params.record_every == 0 || absorbed_now {
            let mut row = TraceRow::from_configuration(phase_idx, &config, params.alpha_hint);
            row.phase = Some(PhaseSummary {
                max_congestion: stats.max_congestion,
                tokens_completed: stats.tokens_completed,
                all_returned: stats.all_returned,
            });
            trace.rows.push(row);
        }
        all_stats.push(stats);
    }

    if trace.rows.last().map(|r| r.round) != Some(phase_idx) {
        trace
            .rows
            .push(TraceRow::from_configuration(phase_idx, &config, params.alpha_hint));
    }
    Ok((trace, all_stats))
}

/// Concentration bound on the maximal queue length during a phase of
/// length 2-tau: `max(sqrt(2 c tau ln n), 6 c ln n)`. Natural logarithm
/// throughout; the additive branch uses the constant 6 that the
/// concentration argument actually yields.
pub fn congestion_bound(tau: u64, n: usize, c: f64) -> Result<f64> {
    if tau == 0 || n < 2 || !(c > 0.0) {
        return Err(Error::Parameter(
            "congestion bound needs tau >= 1, n >= 2, c > 0".into(),
        ));
    }
    let ln_n = (n as f64).ln();
    let sqrt_branch = (2.0 * c * tau as f64 * ln_n).sqrt();
    let log_branch = 6.0 * c * ln_n;
    Ok(sqrt_branch.max(log_branch))
}
