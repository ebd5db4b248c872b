//! Several marketplaces posting bid-ask prices for the same population.

use crate::distributions::ValuationDistribution;
use crate::error::{AgoraError, Result};
use crate::mechanism::solve_baseline;

/// The market-clearing price, where willing sellers and buyers have equal
/// mass: the median valuation.
pub fn walrasian_price(dist: &ValuationDistribution) -> f64 {
    dist.median()
}

/// Gain from undercutting `n` incumbents that share the spread `(p_s, p_b)`
/// by posting `(p_s + ε, p_b − ε)` and taking the whole short side.
///
/// A zero spread leaves nothing to undercut and returns 0.
pub fn undercut_gain(
    dist: &ValuationDistribution,
    p_s: f64,
    p_b: f64,
    eps: f64,
    n: usize,
) -> Result<f64> {
    if n < 2 {
        return Err(AgoraError::InvalidArgument(format!(
            "undercutting needs n >= 2 designers, got {n}"
        )));
    }
    if p_s > p_b {
        return Err(AgoraError::InvalidArgument(format!(
            "sell price {p_s} exceeds buy price {p_b}"
        )));
    }
    let spread = p_b - p_s;
    if spread == 0.0 {
        return Ok(0.0);
    }
    if !(eps > 0.0 && eps < spread / 2.0) {
        return Err(AgoraError::InvalidArgument(format!(
            "undercut must lie in (0, {}), got {eps}",
            spread / 2.0
        )));
    }
    let volume = |s: f64, b: f64| dist.cdf(s).min(1.0 - dist.cdf(b));
    let deviator = volume(p_s + eps, p_b - eps) * (spread - 2.0 * eps);
    let incumbent = volume(p_s, p_b) * spread / n as f64;
    Ok(deviator - incumbent)
}

/// Per-designer profit when `n` designers post the baseline prices with
/// price matching and agents pick among them at random.
pub fn cartel_split(dist: &ValuationDistribution, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(AgoraError::InvalidArgument(
            "need at least one designer".into(),
        ));
    }
    Ok(solve_baseline(dist, 1e-12)?.profit / n as f64)
}
