//! Mixing time of the lazy random walk under worst-start total variation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expander::graph::RegularGraph;

/// Output of a mixing-time query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingTime {
    pub rounds: u64,
    /// True when every start node was iterated exactly; false for the
    /// sampled-start upper-bound estimate used on large graphs.
    pub exact: bool,
}

/// Threshold at which the submultiplicativity argument anchors:
/// `tm(G, eps) <= ceil(ln(1/eps)) * tm(G, 1/(2e))`.
pub const BASE_EPS: f64 = 1.0 / (2.0 * std::f64::consts::E);

/// Largest n for which every start node is iterated exactly.
pub const EXACT_N_CAP: usize = 2_048;

const SAMPLED_STARTS: usize = 32;

/// First round at which the worst-start total variation distance of the
/// lazy walk to uniform drops to `eps`.
///
/// Exact for `n <= 2048`. Beyond that the walk is iterated from a
/// deterministic sample of starts at the base threshold `1/(2e)` and the
/// bound `ceil(ln(1/eps) * tm_base)` is returned with `exact = false`.
pub fn mixing_time(graph: &RegularGraph, eps: f64, laziness: f64) -> Result<MixingTime> {
    if !(eps > 0.0) || eps.is_nan() {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    // below ~1e-12 the power-iterated distance stagnates in float noise
    if eps < 1e-12 {
        return Err(Error::Parameter(format!(
            "eps = {eps} is below the 1e-12 resolution of the exact iteration; \
             use the tvfall bound via required_hops instead"
        )));
    }
    if !(0.0..1.0).contains(&laziness) || laziness <= 0.0 {
        return Err(Error::Parameter(
            "laziness must lie in (0, 1) for an aperiodic walk".into(),
        ));
    }
    if !graph.is_connected() {
        return Err(Error::MixingUndefined("graph is disconnected".into()));
    }
    if eps >= 1.0 {
        return Ok(MixingTime {
            rounds: 0,
            exact: true,
        });
    }

    let n = graph.n();
    if n <= EXACT_N_CAP {
        let starts: Vec<usize> = (0..n).collect();
        let rounds = first_round_below(graph, &starts, eps, laziness);
        Ok(MixingTime {
            rounds,
            exact: true,
        })
    } else {
        let stride = (n / SAMPLED_STARTS).max(1);
        let starts: Vec<usize> = (0..n).step_by(stride).take(SAMPLED_STARTS).collect();
        let base = first_round_below(graph, &starts, BASE_EPS, laziness);
        let rounds = ((1.0 / eps).ln().ceil() as u64).saturating_mul(base);
        Ok(MixingTime {
            rounds,
            exact: false,
        })
    }
}

/// Mixing bound used for the token walk length: `t = ceil(ln(1/eps)) *
/// tm(G, 1/(2e))` with the base mixing time computed exactly (or on
/// sampled starts beyond the exact cap).
pub fn required_hops(graph: &RegularGraph, eps: f64, laziness: f64) -> Result<u64> {
    if !(eps > 0.0) || eps.is_nan() {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    let base = mixing_time(graph, BASE_EPS, laziness)?;
    if eps >= BASE_EPS {
        return Ok(base.rounds);
    }
    Ok(((1.0 / eps).ln().ceil() as u64).saturating_mul(base.rounds))
}

/// Worst total variation distance to uniform over the given starts, per
/// round, until it sinks below `eps`; returns the first such round.
fn first_round_below(graph: &RegularGraph, starts: &[usize], eps: f64, laziness: f64) -> u64 {
    let profile = tv_profile_until(graph, starts, eps, laziness, u64::MAX);
    profile.len() as u64 - 1
}

/// `out[t]` is the worst-start TV distance after `t` rounds; the vector
/// ends at the first round where the distance is `<= eps` (or at
/// `max_rounds`).
pub fn tv_profile_until(
    graph: &RegularGraph,
    starts: &[usize],
    eps: f64,
    laziness: f64,
    max_rounds: u64,
) -> Vec<f64> {
    let n = graph.n();
    let d = graph.degree();
    let uniform = 1.0 / n as f64;
    let move_p = (1.0 - laziness) / d as f64;

    let mut rows: Vec<Vec<f64>> = starts
        .iter()
        .map(|&s| {
            let mut row = vec![0.0; n];
            row[s] = 1.0;
            row
        })
        .collect();

    let worst = |rows: &[Vec<f64>]| -> f64 {
        rows.iter()
            .map(|row| row.iter().map(|&p| (p - uniform).abs()).sum::<f64>() / 2.0)
            .fold(0.0, f64::max)
    };

    let mut profile = vec![worst(&rows)];
    let mut scratch = vec![0.0f64; n];
    let mut t = 0u64;
    while *profile.last().expect("nonempty") > eps && t < max_rounds {
        for row in rows.iter_mut() {
            scratch.iter_mut().for_each(|x| *x = 0.0);
            for (u, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                scratch[u] += laziness * p;
                let share = move_p * p;
                for v in graph.neighbors(u) {
                    scratch[v as usize] += share;
                }
            }
            std::mem::swap(row, &mut scratch);
        }
        t += 1;
        profile.push(worst(&rows));
    }
    profile
}
