//! Exact brute-force computations on tiny instances: the one-step
//! distribution of the chain and absorption probabilities/times, used to
//! validate the samplers and calibrate statistical thresholds.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::ColorConfiguration;
use crate::error::{Error, Result};

/// Size guard for exact computations. Reachable one-step supports are
/// compositions of n into k+1 parts, so the default caps keep them tiny.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityGuard {
    pub max_n: u64,
    pub max_k: usize,
    pub max_states: usize,
}

impl Default for CapacityGuard {
    fn default() -> Self {
        CapacityGuard {
            max_n: 12,
            max_k: 3,
            max_states: 100_000,
        }
    }
}

impl CapacityGuard {
    pub fn check(&self, config: &ColorConfiguration) -> Result<()> {
        if config.n() > self.max_n || config.k() > self.max_k {
            return Err(Error::Capacity(format!(
                "instance n = {}, k = {} exceeds guard n <= {}, k <= {}",
                config.n(),
                config.k(),
                self.max_n,
                self.max_k
            )));
        }
        let states = compositions_count(config.n(), config.k() as u64 + 1);
        if states > self.max_states as u128 {
            return Err(Error::Capacity(format!(
                "{states} reachable configurations exceed cap {}",
                self.max_states
            )));
        }
        Ok(())
    }
}

/// Number of compositions of n into exactly `parts` non-negative cells,
/// i.e. C(n + parts - 1, parts - 1).
fn compositions_count(n: u64, parts: u64) -> u128 {
    let mut out: u128 = 1;
    for i in 0..parts.saturating_sub(1) {
        out = out * (n + i + 1) as u128 / (i + 1) as u128;
    }
    out
}

/// Counts in original label order plus undecided; hashable oracle key.
type RawState = (Vec<u64>, u64);

fn raw_of(config: &ColorConfiguration) -> RawState {
    (config.counts_by_label(), config.undecided())
}

/// Exact probability distribution over next configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDistribution {
    k: usize,
    entries: HashMap<RawState, f64>,
}

impl ConfigDistribution {
    pub fn probability(&self, config: &ColorConfiguration) -> f64 {
        *self.entries.get(&raw_of(config)).unwrap_or(&0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by state for deterministic iteration/serialization.
    pub fn sorted_entries(&self) -> Vec<(ColorConfiguration, f64)> {
        let mut keys: Vec<&RawState> = self.entries.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|key| {
                let config = ColorConfiguration::new(&key.0, key.1).expect("valid oracle state");
                (config, self.entries[key])
            })
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Exact expectation of each per-label count under this distribution.
    pub fn mean_counts(&self) -> (Vec<f64>, f64) {
        let mut mean = vec![0.0; self.k];
        let mut mean_q = 0.0;
        for (state, p) in &self.entries {
            for (m, &c) in mean.iter_mut().zip(state.0.iter()) {
                *m += c as f64 * p;
            }
            mean_q += state.1 as f64 * p;
        }
        (mean, mean_q)
    }

    /// Total variation distance to an empirical frequency table keyed the
    /// same way (per-label counts, undecided).
    pub fn tv_distance_to_samples(&self, samples: &HashMap<RawState, u64>, total: u64) -> f64 {
        let mut tv = 0.0;
        let mut seen_mass = 0.0;
        for (state, &p) in &self.entries {
            let emp = samples.get(state).copied().unwrap_or(0) as f64 / total as f64;
            tv += (p - emp).abs();
            seen_mass += emp;
        }
        // empirical states outside the exact support (cannot happen for a
        // correct sampler, but the metric must stay honest)
        tv += 1.0 - seen_mass;
        tv / 2.0
    }
}

/// Wire form of a distribution: sorted (counts, q, p) triples.
#[derive(Debug, Serialize, Deserialize)]
pub struct DistributionEntry {
    pub counts: Vec<u64>,
    pub q: u64,
    pub p: f64,
}

impl Serialize for ConfigDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<DistributionEntry> = self
            .sorted_entries()
            .into_iter()
            .map(|(config, p)| DistributionEntry {
                counts: config.counts_by_label(),
                q: config.undecided(),
                p,
            })
            .collect();
        rows.serialize(serializer)
    }
}

/// Exact law of one synchronous round, computed by dynamic-programming
/// convolution over agent classes: all agents of one color are
/// exchangeable, so each colored class contributes a binomial split
/// (stay vs turn undecided) and the undecided class a multinomial over
/// the k colors and itself.
pub fn exact_step_distribution(config: &ColorConfiguration) -> Result<ConfigDistribution> {
    exact_step_distribution_guarded(config, &CapacityGuard::default())
}

pub fn exact_step_distribution_guarded(
    config: &ColorConfiguration,
    guard: &CapacityGuard,
) -> Result<ConfigDistribution> {
    guard.check(config)?;
    let n = config.n() as f64;
    let q = config.undecided();
    let by_label = config.counts_by_label();
    let k = by_label.len();

    // partial states: accumulated (next counts, next undecided) -> probability
    let mut partial: HashMap<RawState, f64> = HashMap::new();
    partial.insert((vec![0u64; k], 0u64), 1.0);

    for (i, &c) in by_label.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let p_stay = (c + q) as f64 / n;
        let pmf = binomial_pmf(c, p_stay);
        let mut next: HashMap<RawState, f64> = HashMap::with_capacity(partial.len() * pmf.len());
        for ((counts, undec), prob) in &partial {
            for (stay, bp) in pmf.iter().enumerate() {
                if *bp == 0.0 {
                    continue;
                }
                let mut counts2 = counts.clone();
                counts2[i] += stay as u64;
                let undec2 = undec + (c - stay as u64);
                *next.entry((counts2, undec2)).or_default() += prob * bp;
            }
        }
        partial = next;
    }

    if q > 0 {
        let mut probs: Vec<f64> = by_label.iter().map(|&c| c as f64 / n).collect();
        probs.push(q as f64 / n);
        let splits = multinomial_pmf(q, &probs);
        let mut next: HashMap<RawState, f64> = HashMap::with_capacity(partial.len() * splits.len());
        for ((counts, undec), prob) in &partial {
            for (cells, mp) in &splits {
                let mut counts2 = counts.clone();
                for (c2, &add) in counts2.iter_mut().zip(cells[..k].iter()) {
                    *c2 += add;
                }
                let undec2 = undec + cells[k];
                *next.entry((counts2, undec2)).or_default() += prob * mp;
            }
        }
        partial = next;
    }

    Ok(ConfigDistribution {
        k,
        entries: partial,
    })
}

/// Reference oracle: enumerates all n^n joint sampling outcomes agent by
/// agent. Exponential; only sensible for n <= 6.
pub fn enumerate_step_distribution(config: &ColorConfiguration) -> Result<ConfigDistribution> {
    let n = config.n();
    if n > 6 {
        return Err(Error::Capacity(format!(
            "per-agent enumeration is capped at n <= 6, got {n}"
        )));
    }
    let k = config.k();
    let by_label = config.counts_by_label();
    // agent states in block order: color labels then undecided (0)
    let mut agents: Vec<u32> = Vec::with_capacity(n as usize);
    for (idx, &c) in by_label.iter().enumerate() {
        agents.extend(std::iter::repeat((idx + 1) as u32).take(c as usize));
    }
    agents.extend(std::iter::repeat(0u32).take(config.undecided() as usize));

    let n_us = n as usize;
    let outcomes = (n_us as u64).pow(n_us as u32);
    let p_each = 1.0 / outcomes as f64;
    let mut entries: HashMap<RawState, f64> = HashMap::new();
    let mut choice = vec![0usize; n_us];
    loop {
        let mut counts = vec![0u64; k];
        let mut undec = 0u64;
        for (a, &pick) in choice.iter().enumerate() {
            let own = agents[a];
            let partner = agents[pick];
            let new = if own == 0 {
                partner
            } else if partner == 0 || partner == own {
                own
            } else {
                0
            };
            if new == 0 {
                undec += 1;
            } else {
                counts[(new - 1) as usize] += 1;
            }
        }
        *entries.entry((counts, undec)).or_default() += p_each;

        // odometer over the n^n choice space
        let mut pos = 0;
        loop {
            if pos == n_us {
                return Ok(ConfigDistribution { k, entries });
            }
            choice[pos] += 1;
            if choice[pos] < n_us {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn binomial_pmf(m: u64, p: f64) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(m as usize + 1);
    for x in 0..=m {
        pmf.push(binom_coeff(m, x) * p.powi(x as i32) * (1.0 - p).powi((m - x) as i32));
    }
    pmf
}

fn binom_coeff(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0f64;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// All (cells, probability) pairs of a multinomial with `m` trials.
fn multinomial_pmf(m: u64, probs: &[f64]) -> Vec<(Vec<u64>, f64)> {
    let mut out = Vec::new();
    let mut cells = vec![0u64; probs.len()];
    fill_multinomial(m, probs, 0, 1.0, m, &mut cells, &mut out);
    out
}

fn fill_multinomial(
    m: u64,
    probs: &[f64],
    idx: usize,
    acc: f64,
    left: u64,
    cells: &mut Vec<u64>,
    out: &mut Vec<(Vec<u64>, f64)>,
) {
    if idx + 1 == probs.len() {
        cells[idx] = left;
        // multiply the multinomial coefficient term for the last cell: p^left
        let p = probs[idx].powi(left as i32);
        out.push((cells.clone(), acc * p));
        cells[idx] = 0;
        return;
    }
    for x in 0..=left {
        cells[idx] = x;
        let term = binom_coeff(left, x) * probs[idx].powi(x as i32);
        if term > 0.0 || x == 0 {
            fill_multinomial(m, probs, idx + 1, acc * term, left - x, cells, out);
        }
        cells[idx] = 0;
    }
}

/// Identity of an absorbing state of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum AbsorbingState {
    Monochromatic { label: u32 },
    AllUndecided,
}

/// How the absorption numbers were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum AbsorptionMethod {
    /// Dense linear solve over the reachable space; exact.
    LinearSolve,
    /// Truncated forward iteration; `residual` is the unabsorbed mass.
    TruncatedIteration { horizon: u64, residual: f64 },
}

/// Absorption probabilities and expected absorption time from one start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionReport {
    pub absorption: Vec<(AbsorbingState, f64)>,
    /// Expected rounds to absorption (truncated partial sum in iteration mode).
    pub expected_rounds: f64,
    #[serde(flatten)]
    pub method: AbsorptionMethod,
    pub reachable_states: usize,
}

impl AbsorptionReport {
    pub fn probability_of(&self, state: AbsorbingState) -> f64 {
        self.absorption
            .iter()
            .find(|(s, _)| *s == state)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }
}

/// Largest reachable space for which the dense solve path is offered.
pub const SOLVE_STATE_CAP: usize = 5_000;

/// Builds the exact transition structure over the reachable label-resolved
/// state space and computes absorption probabilities plus the expected
/// absorption time. `horizon = None` demands the dense linear-solve path;
/// `Some(h)` runs truncated iteration and reports the residual.
pub fn exact_absorption(
    config: &ColorConfiguration,
    horizon: Option<u64>,
) -> Result<AbsorptionReport> {
    exact_absorption_guarded(config, horizon, &CapacityGuard::default())
}

pub fn exact_absorption_guarded(
    config: &ColorConfiguration,
    horizon: Option<u64>,
    guard: &CapacityGuard,
) -> Result<AbsorptionReport> {
    guard.check(config)?;
    let k = config.k();

    // breadth-first closure of the reachable space
    let start = raw_of(config);
    let mut index: HashMap<RawState, usize> = HashMap::new();
    let mut states: Vec<RawState> = Vec::new();
    let mut transitions: Vec<Vec<(usize, f64)>> = Vec::new();
    index.insert(start.clone(), 0);
    states.push(start);
    let mut frontier = 0usize;
    while frontier < states.len() {
        let state = states[frontier].clone();
        let state_config = ColorConfiguration::new(&state.0, state.1).expect("reachable state");
        let row = if is_absorbing(&state, k) {
            vec![(frontier, 1.0)]
        } else {
            let dist = exact_step_distribution_guarded(&state_config, guard)?;
            let mut row = Vec::with_capacity(dist.len());
            for (next, p) in dist.sorted_entries() {
                let key = raw_of(&next);
                let next_idx = *index.entry(key.clone()).or_insert_with(|| {
                    states.push(key);
                    states.len() - 1
                });
                row.push((next_idx, p));
            }
            row
        };
        transitions.push(row);
        frontier += 1;
    }

    let absorbing: Vec<Option<AbsorbingState>> = states
        .iter()
        .map(|s| classify_absorbing(s, k))
        .collect();
    let mut targets: Vec<AbsorbingState> = absorbing.iter().flatten().copied().collect();
    targets.sort();

    match horizon {
        None => {
            if states.len() > SOLVE_STATE_CAP {
                return Err(Error::Capacity(format!(
                    "{} reachable states exceed the dense-solve cap {SOLVE_STATE_CAP}; \
                     pass a horizon for truncated iteration",
                    states.len()
                )));
            }
            solve_absorption(&states, &transitions, &absorbing, &targets)
        }
        Some(h) => Ok(iterate_absorption(
            &states,
            &transitions,
            &absorbing,
            &targets,
            h,
        )),
    }
}

fn is_absorbing(state: &RawState, k: usize) -> bool {
    classify_absorbing(state, k).is_some()
}

fn classify_absorbing(state: &RawState, _k: usize) -> Option<AbsorbingState> {
    let n: u64 = state.0.iter().sum::<u64>() + state.1;
    if state.1 == n {
        return Some(AbsorbingState::AllUndecided);
    }
    for (i, &c) in state.0.iter().enumerate() {
        if c == n {
            return Some(AbsorbingState::Monochromatic {
                label: (i + 1) as u32,
            });
        }
    }
    None
}

fn solve_absorption(
    states: &[RawState],
    transitions: &[Vec<(usize, f64)>],
    absorbing: &[Option<AbsorbingState>],
    targets: &[AbsorbingState],
) -> Result<AbsorptionReport> {
    let transient: Vec<usize> = (0..states.len()).filter(|&i| absorbing[i].is_none()).collect();
    let t_index: HashMap<usize, usize> = transient.iter().enumerate().map(|(j, &i)| (i, j)).collect();
    let m = transient.len();

    if m == 0 {
        // started absorbed
        let state0 = absorbing[0].expect("state 0 absorbed");
        let absorption = targets
            .iter()
            .map(|&t| (t, if t == state0 { 1.0 } else { 0.0 }))
            .collect();
        return Ok(AbsorptionReport {
            absorption,
            expected_rounds: 0.0,
            method: AbsorptionMethod::LinearSolve,
            reachable_states: states.len(),
        });
    }

    // (I - T_tt) x = rhs for absorption columns and expected time
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut rhs = DMatrix::<f64>::zeros(m, targets.len() + 1);
    for (j, &i) in transient.iter().enumerate() {
        for &(next, p) in &transitions[i] {
            if let Some(&jn) = t_index.get(&next) {
                a[(j, jn)] -= p;
            } else if let Some(abs_state) = absorbing[next] {
                let col = targets.iter().position(|&t| t == abs_state).expect("known target");
                rhs[(j, col)] += p;
            }
        }
        rhs[(j, targets.len())] = 1.0; // expected-time column
    }

    let lu = a.lu();
    let solution = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("absorption system is singular".into()))?;

    let row0 = t_index[&0];
    let absorption: Vec<(AbsorbingState, f64)> = targets
        .iter()
        .enumerate()
        .map(|(col, &t)| (t, solution[(row0, col)]))
        .collect();
    Ok(AbsorptionReport {
        absorption,
        expected_rounds: solution[(row0, targets.len())],
        method: AbsorptionMethod::LinearSolve,
        reachable_states: states.len(),
    })
}

fn iterate_absorption(
    states: &[RawState],
    transitions: &[Vec<(usize, f64)>],
    absorbing: &[Option<AbsorbingState>],
    targets: &[AbsorbingState],
    horizon: u64,
) -> AbsorptionReport {
    let mut dist = vec![0.0f64; states.len()];
    dist[0] = 1.0;
    let mut absorbed: HashMap<AbsorbingState, f64> = targets.iter().map(|&t| (t, 0.0)).collect();
    let mut expected = 0.0;

    // credit mass already absorbed at round 0
    if let Some(s) = absorbing[0] {
        *absorbed.get_mut(&s).expect("target") = 1.0;
        dist[0] = 0.0;
    }

    for t in 1..=horizon {
        let mut next = vec![0.0f64; states.len()];
        for (i, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for &(j, tp) in &transitions[i] {
                next[j] += p * tp;
            }
        }
        for (j, slot) in next.iter_mut().enumerate() {
            if let Some(s) = absorbing[j] {
                if *slot > 0.0 {
                    *absorbed.get_mut(&s).expect("target") += *slot;
                    expected += t as f64 * *slot;
                    *slot = 0.0;
                }
            }
        }
        dist = next;
        if dist.iter().sum::<f64>() < 1e-15 {
            break;
        }
    }

    let residual: f64 = dist.iter().sum();
    let mut absorption: Vec<(AbsorbingState, f64)> =
        targets.iter().map(|&t| (t, absorbed[&t])).collect();
    absorption.sort_by(|a, b| a.0.cmp(&b.0));
    AbsorptionReport {
        absorption,
        expected_rounds: expected,
        method: AbsorptionMethod::TruncatedIteration { horizon, residual },
        reachable_states: states.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::step;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn monochromatic_step_is_point_mass() {
        let c = ColorConfiguration::new(&[3], 0).unwrap();
        let d = exact_step_distribution(&c).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d.probability(&c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_agent_distribution_is_quarter_each() {
        let c = ColorConfiguration::new(&[1, 1], 0).unwrap();
        let d = exact_step_distribution(&c).unwrap();
        assert_eq!(d.len(), 4);
        for (state, q) in [
            (ColorConfiguration::new(&[1, 1], 0).unwrap(), 0.25),
            (ColorConfiguration::new(&[1, 0], 1).unwrap(), 0.25),
            (ColorConfiguration::new(&[0, 1], 1).unwrap(), 0.25),
            (ColorConfiguration::new(&[0, 0], 2).unwrap(), 0.25),
        ] {
            assert!((d.probability(&state) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn dp_matches_per_agent_enumeration() {
        for (counts, q) in [
            (vec![2u64, 1], 0u64),
            (vec![1, 1, 1], 0),
            (vec![2, 1], 1),
            (vec![2, 2], 0),
            (vec![3, 1], 0),
        ] {
            let c = ColorConfiguration::new(&counts, q).unwrap();
            let dp = exact_step_distribution(&c).unwrap();
            let brute = enumerate_step_distribution(&c).unwrap();
            assert_eq!(dp.len(), brute.len(), "{counts:?} q={q}");
            for (state, p) in brute.sorted_entries() {
                assert!(
                    (dp.probability(&state) - p).abs() < 1e-12,
                    "{counts:?} q={q} state {:?}",
                    state.counts_by_label()
                );
            }
        }
    }

    #[test]
    fn distribution_mass_and_marginals() {
        let c = ColorConfiguration::new(&[3, 2, 1], 2).unwrap();
        let d = exact_step_distribution(&c).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-9);
        let (mean, mean_q) = d.mean_counts();
        let e = c.expected_next();
        // expected_next is rank-ordered; map back to labels
        let by_label_mu: Vec<f64> = {
            let mut v = vec![0.0; c.k()];
            for (rank, &mu) in e.mu.iter().enumerate() {
                v[(c.label_of_rank(rank) - 1) as usize] = mu;
            }
            v
        };
        for (m, mu) in mean.iter().zip(by_label_mu) {
            assert!((m - mu).abs() <= 1e-9 * c.n() as f64);
        }
        assert!((mean_q - e.mu_q).abs() <= 1e-9 * c.n() as f64);
    }

    #[test]
    fn label_permutation_symmetry() {
        // permuting the input colors permutes the output identically
        let a = ColorConfiguration::new(&[3, 1], 1).unwrap();
        let b = ColorConfiguration::new(&[1, 3], 1).unwrap();
        let da = exact_step_distribution(&a).unwrap();
        let db = exact_step_distribution(&b).unwrap();
        assert_eq!(da.len(), db.len());
        for (state, p) in da.sorted_entries() {
            let swapped: Vec<u64> = {
                let v = state.counts_by_label();
                vec![v[1], v[0]]
            };
            let mirror = ColorConfiguration::new(&swapped, state.undecided()).unwrap();
            assert!((db.probability(&mirror) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn capacity_guard_rejects_large_instances() {
        let c = ColorConfiguration::new(&[10, 10], 0).unwrap();
        assert!(matches!(
            exact_step_distribution(&c),
            Err(Error::Capacity(_))
        ));
        let c = ColorConfiguration::new(&[2, 2, 2, 2], 0).unwrap();
        assert!(exact_step_distribution(&c).is_err());
    }

    #[test]
    fn sampler_tv_distance_close_on_small_instance() {
        let c = ColorConfiguration::new(&[2, 1], 0).unwrap();
        let exact = exact_step_distribution(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut freq: HashMap<RawState, u64> = HashMap::new();
        let reps = 100_000;
        for _ in 0..reps {
            let next = step(&c, &mut rng);
            *freq.entry(raw_of(&next)).or_default() += 1;
        }
        let tv = exact.tv_distance_to_samples(&freq, reps);
        assert!(tv <= 0.01, "tv = {tv}");
    }

    #[test]
    fn absorption_of_absorbed_start_is_immediate() {
        let c = ColorConfiguration::new(&[4], 0).unwrap();
        let report = exact_absorption(&c, None).unwrap();
        assert_eq!(report.expected_rounds, 0.0);
        assert!(
            (report.probability_of(AbsorbingState::Monochromatic { label: 1 }) - 1.0).abs()
                < 1e-12
        );
    }

    #[test]
    fn two_agent_absorption_thirds() {
        // From (1,1): recurrence gives 1/3 for each monochromatic state and
        // 1/3 for the stall; expected absorption time 8/3.
        let c = ColorConfiguration::new(&[1, 1], 0).unwrap();
        let report = exact_absorption(&c, None).unwrap();
        let p1 = report.probability_of(AbsorbingState::Monochromatic { label: 1 });
        let p2 = report.probability_of(AbsorbingState::Monochromatic { label: 2 });
        let ps = report.probability_of(AbsorbingState::AllUndecided);
        assert!((p1 - p2).abs() < 1e-12, "symmetry");
        assert!((p1 - 1.0 / 3.0).abs() < 1e-10);
        assert!((ps - (1.0 - 2.0 * p1)).abs() < 1e-10);
        assert!((report.expected_rounds - 8.0 / 3.0).abs() < 1e-10);
        let total: f64 = report.absorption.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn plurality_beats_minority_on_small_instance() {
        let c = ColorConfiguration::new(&[3, 1], 0).unwrap();
        let report = exact_absorption(&c, None).unwrap();
        let p1 = report.probability_of(AbsorbingState::Monochromatic { label: 1 });
        let p2 = report.probability_of(AbsorbingState::Monochromatic { label: 2 });
        assert!(p1 > p2, "p1 = {p1}, p2 = {p2}");
    }

    #[test]
    fn truncated_iteration_approaches_solve() {
        let c = ColorConfiguration::new(&[1, 1], 0).unwrap();
        let exact = exact_absorption(&c, None).unwrap();
        let approx = exact_absorption(&c, Some(200)).unwrap();
        match approx.method {
            AbsorptionMethod::TruncatedIteration { residual, .. } => {
                assert!(residual < 1e-10);
            }
            _ => panic!("expected truncated iteration"),
        }
        for (state, p) in &exact.absorption {
            assert!((approx.probability_of(*state) - p).abs() < 1e-9);
        }
        assert!((approx.expected_rounds - exact.expected_rounds).abs() < 1e-6);
    }
}
