//! Run traces: per-round metric records plus the terminal outcome.

use serde::{Deserialize, Serialize};

use crate::config::ColorConfiguration;

/// Terminal classification of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    /// Monochromatic in the color that initially held the plurality.
    PluralityWin { winner: u32 },
    /// Monochromatic in some other color.
    OtherWin { winner: u32 },
    /// Every agent undecided; the chain can never leave this state.
    AllUndecidedStall,
    Timeout,
}

impl Outcome {
    pub fn is_win(&self) -> bool {
        matches!(self, Outcome::PluralityWin { .. })
    }

    pub fn is_absorbed(&self) -> bool {
        !matches!(self, Outcome::Timeout)
    }
}

/// One recorded round. Metric fields are `None` exactly when undefined
/// (no colored agents left).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: u64,
    pub q: u64,
    pub c1: u64,
    /// Second-largest community (0 when k = 1).
    pub c2: u64,
    /// Smallest community.
    pub ck: u64,
    pub support_ratio: Option<f64>,
    pub md: Option<f64>,
    /// Whether the bias hypothesis behind the drift bound held this round.
    pub gamma_valid: bool,
    pub gamma: Option<f64>,
    /// Congestion summary when the round corresponds to a token phase.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phase: Option<PhaseSummary>,
}

/// Compact per-phase record carried in expander traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub max_congestion: u64,
    pub tokens_completed: u64,
    pub all_returned: bool,
}

impl TraceRow {
    /// Builds a row from a configuration; `alpha_hint` drives the drift
    /// validity flag.
    pub fn from_configuration(round: u64, config: &ColorConfiguration, alpha_hint: f64) -> Self {
        let counts = config.counts();
        let (support_ratio, md) = if counts[0] > 0 {
            (
                Some(config.support_ratio().expect("c1 > 0")),
                Some(config.monochromatic_distance().expect("c1 > 0")),
            )
        } else {
            (None, None)
        };
        let (gamma, gamma_valid) = if counts[0] > 0 && alpha_hint > 0.0 {
            let d = config.plurality_drift(alpha_hint).expect("alpha > 0, c1 > 0");
            (Some(d.value), d.hypothesis_holds)
        } else {
            (None, false)
        };
        TraceRow {
            round,
            q: config.undecided(),
            c1: counts[0],
            c2: if counts.len() > 1 { counts[1] } else { 0 },
            ck: *counts.last().expect("k >= 1"),
            support_ratio,
            md,
            gamma_valid,
            gamma,
            phase: None,
        }
    }

    pub fn csv_header() -> &'static str {
        "round,q,c1,c2,ck,R,md,gamma_valid,gamma"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.round,
            self.q,
            self.c1,
            self.c2,
            self.ck,
            fmt_opt(self.support_ratio),
            fmt_opt(self.md),
            u8::from(self.gamma_valid),
            fmt_opt(self.gamma),
        )
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NaN".to_string(),
    }
}

/// Per-round records plus terminal outcome of one run (complete-graph
/// rounds or expander phases; for the latter `round` counts phases).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub convergence_round: Option<u64>,
    pub n: u64,
    pub k: u32,
    pub initial_plurality_label: u32,
    pub md0: Option<f64>,
    pub r0: Option<f64>,
    pub rr0: Option<f64>,
    pub seed: u64,
}

impl RunTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 48 + 64);
        out.push_str(TraceRow::csv_header());
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    /// Row with the given round number, if recorded.
    pub fn row_at(&self, round: u64) -> Option<&TraceRow> {
        self.rows
            .binary_search_by_key(&round, |r| r.round)
            .ok()
            .map(|i| &self.rows[i])
    }

    /// Summary block for the run-level JSON artifact.
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            outcome: self.outcome,
            convergence_round: self.convergence_round,
            md0: self.md0,
            r0: self.r0,
            rr0: self.rr0,
            seed: self.seed,
        }
    }
}

/// The summary JSON emitted next to each trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub convergence_round: Option<u64>,
    pub md0: Option<f64>,
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    pub rr0: Option<f64>,
    pub seed: u64,
}
