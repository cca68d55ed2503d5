//! Color configurations, global-bias metrics and exact one-step
//! expectation/drift calculators.
//!
//! A configuration holds the per-color community sizes sorted
//! non-increasingly together with the undecided count. The stable
//! permutation back to the original color labels is kept so that
//! "which color won" stays answerable after any number of steps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global state of the consensus chain: per-color counts plus undecided.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColorConfiguration {
    /// Community sizes, non-increasing.
    counts: Vec<u64>,
    /// `labels[rank]` is the original 1-based color label at that rank.
    labels: Vec<u32>,
    undecided: u64,
    n: u64,
}

/// Expected next configuration, one real value per color plus undecided.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedStep {
    /// Expected next count per color, indexed by rank (same order as `counts()`).
    pub mu: Vec<f64>,
    /// Expected next undecided count.
    pub mu_q: f64,
}

/// Closed-form lower bound on the expected growth of `(C1 + 2Q)/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluralityDrift {
    pub value: f64,
    /// True iff `c1 >= (1 + alpha) * c_i` held for every non-plurality color,
    /// i.e. the hypothesis under which the drift bound is guaranteed.
    pub hypothesis_holds: bool,
}

impl ColorConfiguration {
    /// Builds a configuration from per-label counts and an undecided count.
    ///
    /// Counts are re-sorted non-increasingly (stable, so ties keep label
    /// order) and the permutation to original labels is recorded.
    pub fn new(raw_counts: &[u64], undecided: u64) -> Result<Self> {
        if raw_counts.is_empty() {
            return Err(Error::Validation("at least one color is required".into()));
        }
        if raw_counts.len() > u32::MAX as usize {
            return Err(Error::Validation("too many colors".into()));
        }
        let mut n: u64 = undecided;
        for &c in raw_counts {
            n = n
                .checked_add(c)
                .ok_or_else(|| Error::Validation("agent count overflows u64".into()))?;
        }
        if n == 0 {
            return Err(Error::Validation(
                "configuration must contain at least one agent".into(),
            ));
        }
        let mut ranked: Vec<(u64, u32)> = raw_counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, (i + 1) as u32))
            .collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(Self {
            counts: ranked.iter().map(|&(c, _)| c).collect(),
            labels: ranked.iter().map(|&(_, l)| l).collect(),
            undecided,
            n,
        })
    }

    /// Community sizes in non-increasing order.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Original 1-based label of the color at the given rank.
    pub fn label_of_rank(&self, rank: usize) -> u32 {
        self.labels[rank]
    }

    /// Label of the (current) plurality color. Ties resolve to the
    /// smallest original label.
    pub fn plurality_label(&self) -> u32 {
        self.labels[0]
    }

    pub fn undecided(&self) -> u64 {
        self.undecided
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Counts re-ordered back to original label order (label 1 first).
    pub fn counts_by_label(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.counts.len()];
        for (rank, &label) in self.labels.iter().enumerate() {
            out[(label - 1) as usize] = self.counts[rank];
        }
        out
    }

    /// All agents share one color and nobody is undecided.
    pub fn is_monochromatic(&self) -> bool {
        self.undecided == 0 && self.counts[0] == self.n
    }

    pub fn is_all_undecided(&self) -> bool {
        self.undecided == self.n
    }

    /// Monochromatic distance `sum_i (c_i / c1)^2`, in `[1, k]`.
    pub fn monochromatic_distance(&self) -> Result<f64> {
        let c1 = self.require_plurality()?;
        Ok(self
            .counts
            .iter()
            .map(|&c| {
                let r = c as f64 / c1;
                r * r
            })
            .sum())
    }

    /// Support ratio `sum_i c_i / c1 = (n - q) / c1`, in `[1, k]`.
    pub fn support_ratio(&self) -> Result<f64> {
        let c1 = self.require_plurality()?;
        Ok((self.n - self.undecided) as f64 / c1)
    }

    /// `support_ratio^2 / monochromatic_distance`, at most `k` by
    /// Cauchy-Schwarz; equals the inverse Simpson index of the colored part.
    pub fn effective_colors(&self) -> Result<f64> {
        let r = self.support_ratio()?;
        Ok(r * r / self.monochromatic_distance()?)
    }

    fn require_plurality(&self) -> Result<f64> {
        if self.counts[0] == 0 {
            Err(Error::UndefinedMetric(
                "no colored agents left (c1 = 0)".into(),
            ))
        } else {
            Ok(self.counts[0] as f64)
        }
    }

    /// Exact expectation of the next configuration under the update rule:
    /// `mu_i = c_i (c_i + 2q) / n` and `mu_q = (q^2 + (n-q)^2 - sum c_i^2) / n`.
    pub fn expected_next(&self) -> ExpectedStep {
        let n = self.n as f64;
        let q = self.undecided as f64;
        let mu: Vec<f64> = self
            .counts
            .iter()
            .map(|&c| {
                let c = c as f64;
                c * (c + 2.0 * q) / n
            })
            .collect();
        let sum_sq: f64 = self
            .counts
            .iter()
            .map(|&c| {
                let c = c as f64;
                c * c
            })
            .sum();
        let colored = n - q;
        let mu_q = (q * q + colored * colored - sum_sq) / n;
        ExpectedStep { mu, mu_q }
    }

    /// Plurality drift
    /// `Gamma = (1 - (c1 + 2q)/n)^2 + 2 (1 - g) (R - 1) (c1/n)^2`
    /// with `g = 1 / (1 + alpha)`.
    ///
    /// The drift guarantee `E[(C1' + 2Q')/n] >= 1 + Gamma` only holds when
    /// the bias hypothesis does; the flag reports whether it did, so whole
    /// trajectories can be scored without erroring mid-run.
    pub fn plurality_drift(&self, alpha: f64) -> Result<PluralityDrift> {
        if !(alpha > 0.0) {
            return Err(Error::Parameter("alpha must be positive".into()));
        }
        let c1f = self.require_plurality()?;
        let big_r = self.support_ratio()?;
        let n = self.n as f64;
        let q = self.undecided as f64;
        let gamma = 1.0 / (1.0 + alpha);
        let first = 1.0 - (c1f + 2.0 * q) / n;
        let value = first * first + 2.0 * (1.0 - gamma) * (big_r - 1.0) * (c1f / n) * (c1f / n);
        let c1 = self.counts[0] as f64;
        let hypothesis_holds = self.counts[1..].iter().all(|&c| c1 >= (1.0 + alpha) * c as f64);
        Ok(PluralityDrift {
            value,
            hypothesis_holds,
        })
    }
}

/// Wire form: counts in original label order plus the undecided count.
#[derive(Serialize, Deserialize)]
struct ConfigurationWire {
    counts: Vec<u64>,
    q: u64,
}

impl Serialize for ColorConfiguration {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ConfigurationWire {
            counts: self.counts_by_label(),
            q: self.undecided,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ColorConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = ConfigurationWire::deserialize(deserializer)?;
        ColorConfiguration::new(&wire.counts, wire.q).map_err(serde::de::Error::custom)
    }
}

/// Per-agent color assignment; needed whenever agent identity matters
/// (agent-resolved sampling, dynamics on graphs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentStates {
    /// `0` encodes undecided, any other value is a 1-based color label.
    states: Vec<u32>,
}

pub const UNDECIDED: u32 = 0;

impl AgentStates {
    pub fn from_raw(states: Vec<u32>) -> Self {
        Self { states }
    }

    /// Deterministic block assignment: label-1 agents first, then label 2,
    /// ..., undecided last.
    pub fn from_configuration(config: &ColorConfiguration) -> Self {
        let mut states = Vec::with_capacity(config.n() as usize);
        for (label_idx, &count) in config.counts_by_label().iter().enumerate() {
            states.extend(std::iter::repeat((label_idx + 1) as u32).take(count as usize));
        }
        states.extend(std::iter::repeat(UNDECIDED).take(config.undecided() as usize));
        Self { states }
    }

    /// Block assignment followed by a Fisher-Yates shuffle; use on graphs
    /// where the spatial placement of colors matters.
    pub fn from_configuration_shuffled<R: Rng + ?Sized>(
        config: &ColorConfiguration,
        rng: &mut R,
    ) -> Self {
        use rand::seq::SliceRandom;
        let mut out = Self::from_configuration(config);
        out.states.shuffle(rng);
        out
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, agent: usize) -> u32 {
        self.states[agent]
    }

    pub fn set(&mut self, agent: usize, state: u32) {
        self.states[agent] = state;
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.states
    }

    /// Aggregates agent states back into a configuration with `k` colors.
    pub fn to_configuration(&self, k: usize) -> Result<ColorConfiguration> {
        let mut counts = vec![0u64; k];
        let mut undecided = 0u64;
        for &s in &self.states {
            if s == UNDECIDED {
                undecided += 1;
            } else {
                let idx = (s - 1) as usize;
                if idx >= k {
                    return Err(Error::Validation(format!(
                        "agent state label {s} exceeds color count {k}"
                    )));
                }
                counts[idx] += 1;
            }
        }
        ColorConfiguration::new(&counts, undecided)
    }
}

/// Initial-configuration generator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    /// All non-plurality colors equal; color 1 ahead by the factor `1 + alpha`.
    Uniform { n: u64, k: u32, alpha: f64 },
    /// An elite of `elite` colors (color 1 included) with weight `~ 1/sqrt(k)`
    /// each, the rest with weight `~ 1/k`; color 1 further ahead by `1 + alpha`.
    Oligarchic {
        n: u64,
        k: u32,
        alpha: f64,
        elite: u32,
    },
    /// `c1 = 2n/k` and `c_i = (n/k)(1 - 2/k)` for the others.
    Figure2 { n: u64, k: u32 },
    /// Explicit per-label counts, `q = 0`.
    Custom { counts: Vec<u64> },
}

impl InitSpec {
    pub fn n(&self) -> u64 {
        match self {
            InitSpec::Uniform { n, .. }
            | InitSpec::Oligarchic { n, .. }
            | InitSpec::Figure2 { n, .. } => *n,
            InitSpec::Custom { counts } => counts.iter().sum(),
        }
    }

    pub fn k(&self) -> u32 {
        match self {
            InitSpec::Uniform { k, .. }
            | InitSpec::Oligarchic { k, .. }
            | InitSpec::Figure2 { k, .. } => *k,
            InitSpec::Custom { counts } => counts.len() as u32,
        }
    }

    /// Requested multiplicative plurality advantage (0 when not part of the
    /// spec kind).
    pub fn alpha(&self) -> f64 {
        match self {
            InitSpec::Uniform { alpha, .. } | InitSpec::Oligarchic { alpha, .. } => *alpha,
            InitSpec::Figure2 { .. } | InitSpec::Custom { .. } => 0.0,
        }
    }
}

/// Generates the initial configuration for a spec. Fractional targets are
/// floored for every non-plurality color and the whole shortfall goes to
/// color 1, which preserves both `sum = n` and the bias direction.
///
/// The random source is part of the generator contract for future
/// randomized families; the built-in kinds are deterministic and do not
/// consume draws.
pub fn generate_initial<R: Rng + ?Sized>(spec: &InitSpec, _rng: &mut R) -> Result<ColorConfiguration> {
    match spec {
        InitSpec::Uniform { n, k, alpha } => {
            check_shape(*n, *k)?;
            check_alpha(*alpha)?;
            let mut weights = vec![1.0; *k as usize];
            weights[0] = 1.0 + alpha;
            from_weights(*n, &weights)
        }
        InitSpec::Oligarchic { n, k, alpha, elite } => {
            check_shape(*n, *k)?;
            check_alpha(*alpha)?;
            if *elite < 1 || elite > k {
                return Err(Error::Spec(format!(
                    "elite size {elite} must lie in 1..={k}"
                )));
            }
            let sqrt_k = (*k as f64).sqrt();
            let mut weights = Vec::with_capacity(*k as usize);
            weights.push((1.0 + alpha) / sqrt_k);
            for i in 1..*k as usize {
                if i < *elite as usize {
                    weights.push(1.0 / sqrt_k);
                } else {
                    weights.push(1.0 / *k as f64);
                }
            }
            from_weights(*n, &weights)
        }
        InitSpec::Figure2 { n, k } => {
            check_shape(*n, *k)?;
            if *k < 2 {
                return Err(Error::Spec("figure2 family needs k >= 2".into()));
            }
            let nf = *n as f64;
            let kf = *k as f64;
            let other = (nf / kf) * (1.0 - 2.0 / kf);
            let mut counts = vec![0u64; *k as usize];
            let mut used = 0u64;
            for c in counts.iter_mut().skip(1) {
                *c = other.floor() as u64;
                used += *c;
            }
            if used >= *n {
                return Err(Error::Spec("figure2 targets exceed n".into()));
            }
            counts[0] = *n - used;
            finish(&counts)
        }
        InitSpec::Custom { counts } => {
            let config = ColorConfiguration::new(counts, 0)?;
            Ok(config)
        }
    }
}

fn check_shape(n: u64, k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::Spec("need at least one color".into()));
    }
    if n < k as u64 {
        return Err(Error::Spec(format!("n = {n} is smaller than k = {k}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Spec(format!("alpha = {alpha} must be finite and >= 0")));
    }
    Ok(())
}

/// Allocates `n` agents proportionally to `weights`: every color except the
/// first is floored, color 1 absorbs the remainder. Because color 1 always
/// receives at least its own (largest) proportional share, the bias ratio of
/// the weight vector is preserved or improved.
fn from_weights(n: u64, weights: &[f64]) -> Result<ColorConfiguration> {
    let total: f64 = weights.iter().sum();
    let mut counts = vec![0u64; weights.len()];
    let mut used = 0u64;
    for (i, &w) in weights.iter().enumerate().skip(1) {
        let c = (n as f64 * w / total).floor() as u64;
        counts[i] = c;
        used = used
            .checked_add(c)
            .ok_or_else(|| Error::Spec("count overflow".into()))?;
    }
    if used >= n {
        return Err(Error::Spec(
            "weights leave no room for the plurality color".into(),
        ));
    }
    counts[0] = n - used;
    finish(&counts)
}

fn finish(counts: &[u64]) -> Result<ColorConfiguration> {
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::Spec(
            "spec produced an empty color community; increase n or reduce k".into(),
        ));
    }
    let config = ColorConfiguration::new(counts, 0)?;
    debug_assert_eq!(config.plurality_label(), 1);
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn make_config_sorts_and_records_labels() {
        let c = ColorConfiguration::new(&[2, 4, 2], 0).unwrap();
        assert_eq!(c.counts(), &[4, 2, 2]);
        assert_eq!(c.n(), 8);
        assert_eq!(c.plurality_label(), 2);
        // stable tie-break keeps label 1 ahead of label 3
        assert_eq!(c.label_of_rank(1), 1);
        assert_eq!(c.label_of_rank(2), 3);
        assert_eq!(c.counts_by_label(), vec![2, 4, 2]);
    }

    #[test]
    fn make_config_single_color() {
        let c = ColorConfiguration::new(&[5], 0).unwrap();
        assert_eq!(c.k(), 1);
        assert!(c.is_monochromatic());
    }

    #[test]
    fn make_config_all_undecided_is_legal() {
        let c = ColorConfiguration::new(&[0, 0], 3).unwrap();
        assert_eq!(c.counts(), &[0, 0]);
        assert_eq!(c.undecided(), 3);
        assert_eq!(c.n(), 3);
        assert!(c.is_all_undecided());
    }

    #[test]
    fn make_config_rejects_empty_and_overflow() {
        assert!(ColorConfiguration::new(&[], 0).is_err());
        assert!(ColorConfiguration::new(&[u64::MAX, 1], 0).is_err());
        assert!(ColorConfiguration::new(&[0], 0).is_err());
    }

    #[test]
    fn metrics_on_simple_configs() {
        let c = ColorConfiguration::new(&[4, 2, 2], 0).unwrap();
        assert!((c.monochromatic_distance().unwrap() - 1.5).abs() < 1e-12);
        assert!((c.support_ratio().unwrap() - 2.0).abs() < 1e-12);
        assert!((c.effective_colors().unwrap() - 8.0 / 3.0).abs() < 1e-12);

        let mono = ColorConfiguration::new(&[9, 0, 0], 0).unwrap();
        assert_eq!(mono.monochromatic_distance().unwrap(), 1.0);
        assert_eq!(mono.support_ratio().unwrap(), 1.0);
        assert_eq!(mono.effective_colors().unwrap(), 1.0);
    }

    #[test]
    fn support_ratio_with_undecided() {
        let c = ColorConfiguration::new(&[3, 3], 2).unwrap();
        assert!((c.support_ratio().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_configuration_attains_metric_ceilings() {
        let k = 6;
        let c = ColorConfiguration::new(&vec![10; k], 0).unwrap();
        assert!((c.monochromatic_distance().unwrap() - k as f64).abs() < 1e-12);
        assert!((c.support_ratio().unwrap() - k as f64).abs() < 1e-12);
        assert!((c.effective_colors().unwrap() - k as f64).abs() < 1e-9);
    }

    #[test]
    fn metrics_error_when_no_plurality() {
        let c = ColorConfiguration::new(&[0, 0], 3).unwrap();
        assert!(matches!(
            c.monochromatic_distance(),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(c.support_ratio().is_err());
        assert!(c.effective_colors().is_err());
    }

    #[test]
    fn expected_next_formula_arithmetic() {
        let c = ColorConfiguration::new(&[2, 2], 0).unwrap();
        let e = c.expected_next();
        assert_eq!(e.mu, vec![1.0, 1.0]);
        assert_eq!(e.mu_q, 2.0);
    }

    #[test]
    fn expected_next_monochromatic_is_absorbing() {
        let c = ColorConfiguration::new(&[12], 0).unwrap();
        let e = c.expected_next();
        assert_eq!(e.mu, vec![12.0]);
        assert_eq!(e.mu_q, 0.0);
    }

    #[test]
    fn expected_next_initial_round_identities() {
        // With q = 0: mu_1 = c1^2 / n = n / R^2 and mu_q = n (1 - 1/rr).
        let c = ColorConfiguration::new(&[40, 8, 8, 8], 0).unwrap();
        let e = c.expected_next();
        let n = c.n() as f64;
        let r = c.support_ratio().unwrap();
        let rr = c.effective_colors().unwrap();
        assert!((e.mu[0] - n / (r * r)).abs() < 1e-9);
        assert!((e.mu_q - n * (1.0 - 1.0 / rr)).abs() < 1e-9);
    }

    #[test]
    fn expectation_conserves_mass() {
        let c = ColorConfiguration::new(&[5, 3, 2, 1], 4).unwrap();
        let e = c.expected_next();
        let total: f64 = e.mu.iter().sum::<f64>() + e.mu_q;
        assert!((total - c.n() as f64).abs() <= 1e-9 * c.n() as f64);
    }

    #[test]
    fn drift_vanishes_on_monochromatic() {
        let c = ColorConfiguration::new(&[100], 0).unwrap();
        let d = c.plurality_drift(0.5).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(d.hypothesis_holds);
    }

    #[test]
    fn drift_formula_arithmetic() {
        // c = (2,1,1), q = 0, n = 4, alpha = 1: Gamma = 1/4 + 1/4 = 1/2.
        let c = ColorConfiguration::new(&[2, 1, 1], 0).unwrap();
        let d = c.plurality_drift(1.0).unwrap();
        assert!((d.value - 0.5).abs() < 1e-12);
        assert!(d.hypothesis_holds);
    }

    #[test]
    fn drift_bound_agrees_with_expectation() {
        // Both sides evaluated exactly; this instance sits on the equality
        // boundary because every minority community is exactly c1/(1+alpha).
        let c = ColorConfiguration::new(&[2, 1, 1], 0).unwrap();
        let d = c.plurality_drift(1.0).unwrap();
        let e = c.expected_next();
        let lhs = (e.mu[0] + 2.0 * e.mu_q) / c.n() as f64;
        assert!(lhs + 1e-12 >= 1.0 + d.value);
        assert!((lhs - 1.5).abs() < 1e-12);
    }

    #[test]
    fn drift_flags_failed_hypothesis() {
        let c = ColorConfiguration::new(&[4, 4, 1], 0).unwrap();
        let d = c.plurality_drift(0.5).unwrap();
        assert!(!d.hypothesis_holds);
        assert!(c.plurality_drift(0.0).is_err());
        assert!(c.plurality_drift(-1.0).is_err());
    }

    #[test]
    fn generate_uniform_unbiased() {
        let c = generate_initial(
            &InitSpec::Uniform {
                n: 100,
                k: 4,
                alpha: 0.0,
            },
            &mut rng(),
        )
        .unwrap();
        assert_eq!(c.counts(), &[25, 25, 25, 25]);
        assert_eq!(c.undecided(), 0);
    }

    #[test]
    fn generate_figure2_rounding_policy() {
        let c = generate_initial(&InitSpec::Figure2 { n: 64, k: 4 }, &mut rng()).unwrap();
        assert_eq!(c.counts(), &[40, 8, 8, 8]);
        assert_eq!(c.plurality_label(), 1);
    }

    #[test]
    fn generate_custom_passthrough() {
        let c = generate_initial(
            &InitSpec::Custom {
                counts: vec![3, 2, 1],
            },
            &mut rng(),
        )
        .unwrap();
        assert_eq!(c.counts(), &[3, 2, 1]);
        assert_eq!(c.n(), 6);
    }

    #[test]
    fn generate_biased_uniform_holds_requested_advantage() {
        let alpha = 0.2;
        let c = generate_initial(
            &InitSpec::Uniform {
                n: 100_000,
                k: 50,
                alpha,
            },
            &mut rng(),
        )
        .unwrap();
        assert_eq!(c.undecided(), 0);
        assert_eq!(c.counts().iter().sum::<u64>(), 100_000);
        let c1 = c.counts()[0] as f64;
        for &ci in &c.counts()[1..] {
            assert!(c1 >= (1.0 + alpha) * ci as f64);
        }
    }

    #[test]
    fn generate_oligarchic_bias_and_elite_shape() {
        let spec = InitSpec::Oligarchic {
            n: 100_000,
            k: 46,
            alpha: 0.2,
            elite: 5,
        };
        let c = generate_initial(&spec, &mut rng()).unwrap();
        assert_eq!(c.counts().iter().sum::<u64>(), 100_000);
        let c1 = c.counts()[0] as f64;
        for &ci in &c.counts()[1..] {
            assert!(c1 >= 1.2 * ci as f64);
        }
        // elite colors dwarf the long tail
        assert!(c.counts()[4] > 4 * c.counts()[5]);
    }

    #[test]
    fn generate_rejects_infeasible_specs() {
        assert!(generate_initial(
            &InitSpec::Uniform {
                n: 3,
                k: 8,
                alpha: 0.0
            },
            &mut rng()
        )
        .is_err());
        // so skewed that some community floors to zero
        assert!(generate_initial(
            &InitSpec::Uniform {
                n: 5,
                k: 4,
                alpha: 10.0
            },
            &mut rng()
        )
        .is_err());
        assert!(generate_initial(
            &InitSpec::Oligarchic {
                n: 100,
                k: 4,
                alpha: 0.1,
                elite: 9
            },
            &mut rng()
        )
        .is_err());
    }

    #[test]
    fn configuration_json_round_trip_preserves_labels() {
        let c = ColorConfiguration::new(&[2, 4, 2], 1).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"counts":[2,4,2],"q":1}"#);
        let back: ColorConfiguration = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn init_spec_json_uses_kind_discriminator() {
        let spec = InitSpec::Uniform {
            n: 10,
            k: 2,
            alpha: 0.5,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains(r#""kind":"uniform""#));
        let back: InitSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn agent_states_round_trip() {
        let c = ColorConfiguration::new(&[2, 1], 1).unwrap();
        let states = AgentStates::from_configuration(&c);
        assert_eq!(states.as_slice(), &[1, 1, 2, UNDECIDED]);
        let back = states.to_configuration(2).unwrap();
        assert_eq!(back, c);

        let shuffled = AgentStates::from_configuration_shuffled(&c, &mut rng());
        assert_eq!(shuffled.to_configuration(2).unwrap(), c);
    }
}
