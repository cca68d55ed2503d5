//! Trajectory analysis: phase detection along the four-stage narrative
//! (first round, age of the undecided, plateau, takeover), md-sweep
//! experiments probing the linear dependence of convergence time on the
//! monochromatic distance, and monotonicity auditing of the support ratio.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{generate_initial, InitSpec};
use crate::dynamics::{run, RunParams};
use crate::error::{Error, Result};
use crate::trace::RunTrace;

pub const DEFAULT_GAMMA: f64 = 4.0;
pub const DEFAULT_EPS_TILDE: f64 = 0.05;
pub const DEFAULT_KAPPA: f64 = 10.0;

/// Detected stage boundaries of one trace. Every boundary is clamped to
/// the convergence round when the run absorbed, so a run that starts
/// absorbed reports all zeros; a boundary never reached stays `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseBoundaries {
    /// Always round 1 (round 0 for a run absorbed at start).
    pub first_round_end: Option<u64>,
    /// First round with `q < n/2 + eps_tilde * n`.
    pub age_of_undecided_end: Option<u64>,
    /// First round with `c1 > 2 gamma n / md0`.
    pub plateau_end: Option<u64>,
    pub convergence_round: Option<u64>,
    /// True when the plateau preconditions (`|q - n/2|` small and `c1`
    /// below `gamma n / md0`) were observed at some round.
    pub plateau_precondition_met: bool,
}

impl PhaseBoundaries {
    /// Rounds between the undecided threshold and the plateau exit, when
    /// both exist.
    pub fn plateau_length(&self) -> Option<u64> {
        match (self.age_of_undecided_end, self.plateau_end) {
            (Some(a), Some(p)) => Some(p.saturating_sub(a)),
            _ => None,
        }
    }
}

/// Computes stage boundaries from a (granularity-1) trace.
///
/// Thresholds follow the plateau analysis: the undecided phase ends when
/// `q` first drops below `n/2 + eps_tilde n`, and the plateau ends when
/// `c1` first exceeds `2 gamma n / md0` with `md0` taken from the trace's
/// initial configuration.
pub fn detect_phases(trace: &RunTrace, gamma: f64, eps_tilde: f64) -> Result<PhaseBoundaries> {
    if !(gamma > 0.0) {
        return Err(Error::Parameter("gamma must be positive".into()));
    }
    if !(eps_tilde >= 0.0) {
        return Err(Error::Parameter("eps_tilde must be non-negative".into()));
    }
    if trace.rows.is_empty() {
        return Err(Error::Analysis("trace has no rows".into()));
    }
    let absorbed_at_start = trace.convergence_round == Some(0);
    if !absorbed_at_start && trace.row_at(1).is_none() {
        return Err(Error::Analysis(
            "trace lacks a round-1 row; record with stride 1 for phase analysis".into(),
        ));
    }

    let n = trace.n as f64;
    let md0 = trace
        .md0
        .ok_or_else(|| Error::Analysis("initial configuration has no defined md".into()))?;
    let conv = trace.convergence_round;
    let clamp = |round: Option<u64>| -> Option<u64> {
        match (round, conv) {
            (Some(r), Some(c)) => Some(r.min(c)),
            (Some(r), None) => Some(r),
            (None, Some(c)) => Some(c),
            (None, None) => None,
        }
    };
    // each boundary is searched from the previous one onward, which makes
    // the sequence monotone by construction (round 0 has q = 0 and must
    // not satisfy the undecided threshold retroactively)
    let first_from = |from: Option<u64>, pred: &dyn Fn(&crate::trace::TraceRow) -> bool| {
        from.and_then(|start| {
            trace
                .rows
                .iter()
                .find(|row| row.round >= start && pred(row))
                .map(|row| row.round)
        })
    };

    let q_threshold = n / 2.0 + eps_tilde * n;
    let age_end = first_from(Some(1), &|row| (row.q as f64) < q_threshold);
    let c1_threshold = 2.0 * gamma * n / md0;
    let plateau_end = first_from(age_end, &|row| row.c1 as f64 > c1_threshold);
    let precondition = trace.rows.iter().any(|row| {
        (row.q as f64 - n / 2.0).abs() <= 2.0 * gamma * gamma * n / md0
            && (row.c1 as f64) <= gamma * n / md0
    });

    Ok(PhaseBoundaries {
        first_round_end: clamp(Some(1)),
        age_of_undecided_end: clamp(age_end),
        plateau_end: clamp(plateau_end),
        convergence_round: conv,
        plateau_precondition_met: precondition,
    })
}

/// Aggregate of all runs of one family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub spec: InitSpec,
    pub md0: f64,
    pub r0: f64,
    pub seeds: u64,
    /// Mean/std of the convergence round over winning runs.
    pub mean_rounds: Option<f64>,
    pub std_rounds: Option<f64>,
    pub mean_plateau_len: Option<f64>,
    pub win_frequency: f64,
    pub stall_frequency: f64,
    /// Runs where the plateau preconditions never showed up (reported, not
    /// dropped).
    pub flagged_runs: u64,
}

/// Correlation block of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    /// Pearson correlation of mean convergence time against `md0 * ln n`.
    pub rounds_vs_md_log_n: Option<f64>,
    /// Pearson correlation of mean plateau length against `md0`.
    pub plateau_vs_md: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: SweepFit,
    pub n: u64,
    pub alpha: f64,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "md0,r0,seeds,mean_rounds,std_rounds,mean_plateau_len,win_frequency,stall_frequency,flagged_runs\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.md0,
                row.r0,
                row.seeds,
                fmt_opt(row.mean_rounds),
                fmt_opt(row.std_rounds),
                fmt_opt(row.mean_plateau_len),
                row.win_frequency,
                row.stall_frequency,
                row.flagged_runs,
            ));
        }
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NaN".into(),
    }
}

/// Runs every (spec, seed) pair of a family and aggregates convergence
/// statistics. Family members must share n and alpha; seeds are shared
/// across members (common random numbers), and each run's stream is
/// derived from (seed, member index), so aggregation is order-independent
/// and the result deterministic.
pub fn sweep_md(family: &[InitSpec], seeds: &[u64], params: &RunParams) -> Result<SweepResult> {
    if family.is_empty() {
        return Err(Error::Parameter("family must not be empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Parameter("need at least one seed".into()));
    }
    params.validate()?;
    let n = family[0].n();
    let alpha = family[0].alpha();
    for spec in family {
        if spec.n() != n {
            return Err(Error::Spec(format!(
                "family members disagree on n: {n} vs {}",
                spec.n()
            )));
        }
        if (spec.alpha() - alpha).abs() > 1e-12 {
            return Err(Error::Spec(format!(
                "family members disagree on alpha: {alpha} vs {}",
                spec.alpha()
            )));
        }
    }

    // resolve configs up front so infeasible members fail before any run
    let configs = family
        .iter()
        .map(|spec| {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            generate_initial(spec, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    // streams depend on the spec content, not its position, so identical
    // members produce identical rows
    let spec_hashes: Vec<u64> = family
        .iter()
        .map(|spec| fnv1a(serde_json::to_string(spec).expect("spec serializes").as_bytes()))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..family.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let runs: Vec<(usize, RunTrace)> = jobs
        .par_iter()
        .map(|&(idx, seed)| {
            let mut run_params = params.clone();
            run_params.seed = seed;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ spec_hashes[idx]);
            (idx, run(&configs[idx], &run_params, &mut rng))
        })
        .collect();

    let mut rows = Vec::with_capacity(family.len());
    for (idx, spec) in family.iter().enumerate() {
        let config = &configs[idx];
        let traces: Vec<&RunTrace> = runs
            .iter()
            .filter(|(i, _)| *i == idx)
            .map(|(_, t)| t)
            .collect();
        let wins: Vec<f64> = traces
            .iter()
            .filter(|t| t.outcome.is_win())
            .filter_map(|t| t.convergence_round.map(|r| r as f64))
            .collect();
        let stalls = traces
            .iter()
            .filter(|t| matches!(t.outcome, crate::trace::Outcome::AllUndecidedStall))
            .count();
        let mut plateau_lens = Vec::new();
        let mut flagged = 0u64;
        for t in &traces {
            let b = detect_phases(t, DEFAULT_GAMMA, DEFAULT_EPS_TILDE)?;
            if !b.plateau_precondition_met {
                flagged += 1;
            }
            if let Some(len) = b.plateau_length() {
                plateau_lens.push(len as f64);
            }
        }
        rows.push(SweepRow {
            spec: spec.clone(),
            md0: config.monochromatic_distance()?,
            r0: config.support_ratio()?,
            seeds: seeds.len() as u64,
            mean_rounds: mean(&wins),
            std_rounds: std_dev(&wins),
            mean_plateau_len: mean(&plateau_lens),
            win_frequency: wins.len() as f64 / traces.len() as f64,
            stall_frequency: stalls as f64 / traces.len() as f64,
            flagged_runs: flagged,
        });
    }

    let ln_n = (n as f64).ln();
    let xs: Vec<f64> = rows.iter().map(|r| r.md0 * ln_n).collect();
    let ys: Vec<Option<f64>> = rows.iter().map(|r| r.mean_rounds).collect();
    let rounds_corr = pearson_opt(&xs, &ys);
    let pxs: Vec<f64> = rows.iter().map(|r| r.md0).collect();
    let pys: Vec<Option<f64>> = rows.iter().map(|r| r.mean_plateau_len).collect();
    let plateau_corr = pearson_opt(&pxs, &pys);

    Ok(SweepResult {
        rows,
        fit: SweepFit {
            rounds_vs_md_log_n: rounds_corr,
            plateau_vs_md: plateau_corr,
        },
        n,
        alpha,
    })
}

/// Builds an oligarchic family whose monochromatic distances approximate
/// the given targets: for each target the elite size minimizing the md
/// error is chosen. The largest target typically lands on the uniform
/// end (elite = k).
pub fn family_from_md_targets(n: u64, k: u32, alpha: f64, targets: &[f64]) -> Result<Vec<InitSpec>> {
    let mut family = Vec::with_capacity(targets.len());
    for &target in targets {
        let mut best: Option<(f64, u32)> = None;
        for elite in 1..=k {
            let md = ideal_oligarchic_md(k, alpha, elite);
            let err = (md - target).abs();
            if best.map_or(true, |(e, _)| err < e) {
                best = Some((err, elite));
            }
        }
        let (_, elite) = best.expect("k >= 1");
        family.push(InitSpec::Oligarchic { n, k, alpha, elite });
    }
    Ok(family)
}

/// md of the real-valued (un-floored) oligarchic profile.
fn ideal_oligarchic_md(k: u32, alpha: f64, elite: u32) -> f64 {
    let kf = k as f64;
    let sqrt_k = kf.sqrt();
    let w1 = (1.0 + alpha) / sqrt_k;
    let mut md = 1.0;
    md += (elite.saturating_sub(1)) as f64 * (1.0 / sqrt_k / w1).powi(2);
    md += (k - elite) as f64 * (1.0 / kf / w1).powi(2);
    md
}

/// FNV-1a; stable across platforms and toolchains, unlike `DefaultHasher`.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

fn std_dev(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    Some(
        (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt(),
    )
}

/// Pearson correlation; `None` when either side is degenerate (fewer than
/// two points, missing values, or zero variance).
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn pearson_opt(xs: &[f64], ys: &[Option<f64>]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(&x, y)| y.map(|y| (x, y)))
        .collect();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    pearson(&xs, &ys)
}

/// Violation statistics of the support-ratio monotonicity audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// Consecutive-round pairs with `mu_1 >= lambda_threshold * ln n`.
    pub eligible_steps: u64,
    pub violations: u64,
    /// Rounds `t` where `R(t+1)` exceeded the allowed growth.
    pub violation_rounds: Vec<u64>,
    /// No pair cleared the eligibility threshold.
    pub insufficient_data: bool,
}

impl MonotonicityReport {
    pub fn violation_fraction(&self) -> f64 {
        if self.eligible_steps == 0 {
            0.0
        } else {
            self.violations as f64 / self.eligible_steps as f64
        }
    }
}

/// Audits `R(t+1) <= R(t) * (1 + kappa * sqrt(ln n / mu_1))` over all
/// consecutive recorded rounds where `mu_1 >= lambda_threshold * ln n`,
/// with `mu_1` recomputed from the trace counts.
pub fn check_monotonicity(
    trace: &RunTrace,
    lambda_threshold: f64,
    kappa: f64,
) -> Result<MonotonicityReport> {
    if !(lambda_threshold > 0.0) || !(kappa > 0.0) {
        return Err(Error::Parameter(
            "lambda_threshold and kappa must be positive".into(),
        ));
    }
    let n = trace.n as f64;
    let ln_n = n.ln();
    let mut eligible = 0u64;
    let mut violations = 0u64;
    let mut rounds = Vec::new();
    for pair in trace.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.round != a.round + 1 {
            continue;
        }
        let (Some(r_now), Some(r_next)) = (a.support_ratio, b.support_ratio) else {
            continue;
        };
        let mu_1 = a.c1 as f64 * (a.c1 as f64 + 2.0 * a.q as f64) / n;
        if mu_1 < lambda_threshold * ln_n {
            continue;
        }
        eligible += 1;
        let allowed = r_now * (1.0 + kappa * (ln_n / mu_1).sqrt());
        if r_next > allowed {
            violations += 1;
            rounds.push(a.round);
        }
    }
    Ok(MonotonicityReport {
        eligible_steps: eligible,
        violations,
        violation_rounds: rounds,
        insufficient_data: eligible == 0,
    })
}
