//! Thin sampling helpers over `rand_distr`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Binomial draw that tolerates the degenerate edges p <= 0 and p >= 1.
pub fn binomial<R: Rng + ?Sized>(rng: &mut R, m: u64, p: f64) -> u64 {
    if m == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return m;
    }
    Binomial::new(m, p)
        .expect("valid binomial parameters")
        .sample(rng)
}

/// Multinomial draw via sequential conditional binomials. `probs` must be
/// non-negative and sum to (at most) 1 up to rounding; the final cell
/// receives whatever remains.
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, m: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = m;
    let mut mass_left = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = remaining;
            break;
        }
        let cond = if mass_left <= 0.0 {
            1.0
        } else {
            (p / mass_left).clamp(0.0, 1.0)
        };
        let x = binomial(rng, remaining, cond);
        out[i] = x;
        remaining -= x;
        mass_left -= p;
    }
    out
}
