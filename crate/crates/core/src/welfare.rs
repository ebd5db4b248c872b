//! Gains from trade for each market configuration.
//!
//! Welfare counts buyer value minus seller value for every executed trade,
//! so transfers (including the marketplace's profit) cancel.

use serde::{Deserialize, Serialize};

use crate::coexistence::solve_coexistence;
use crate::distributions::ValuationDistribution;
use crate::error::{AgoraError, Result};
use crate::numeric::integrate;
use crate::search::{check_probability, search_payoff};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareDecomposition {
    pub marketplace_part: f64,
    pub decentralized_part: f64,
    pub total: f64,
    /// Welfare if only the search market existed.
    pub search_only: f64,
    /// Welfare if only the marketplace existed, at the same cutoffs.
    pub marketplace_only: f64,
}

/// Everyone searches: `p ∫₀¹ θ(2F(θ) − 1) f(θ) dθ`.
pub fn welfare_search_only(dist: &ValuationDistribution, p: f64) -> Result<f64> {
    check_probability(p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(p * integrate(|t| t * (2.0 * dist.cdf(t) - 1.0) * dist.pdf(t), 0.0, 1.0))
}

/// Marketplace trades between `[0, θ̲]` and `[θ̄, 1]`:
/// `∫_θ̄¹ x f − ∫₀^θ̲ x f`.
pub fn welfare_marketplace(dist: &ValuationDistribution, theta_low: f64, theta_high: f64) -> f64 {
    dist.partial_moment(theta_high, 1.0) - dist.partial_moment(0.0, theta_low)
}

/// Search-market welfare when `[θ̲, θ̄]` searches:
/// `p ∫_θ̲^θ̄ θ (2F − F(θ̲) − F(θ̄))/(F(θ̄) − F(θ̲)) f dθ`.
pub fn welfare_decentralized(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
    p: f64,
) -> Result<f64> {
    check_probability(p)?;
    let (f_low, f_high) = (dist.cdf(theta_low), dist.cdf(theta_high));
    let mass = f_high - f_low;
    if p == 0.0 || mass <= 0.0 {
        return Ok(0.0);
    }
    Ok(p * integrate(
        |t| t * (2.0 * dist.cdf(t) - f_low - f_high) / mass * dist.pdf(t),
        theta_low,
        theta_high,
    ))
}

pub fn welfare_coexistence(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
    p: f64,
) -> Result<WelfareDecomposition> {
    if !(0.0 <= theta_low && theta_low <= theta_high && theta_high <= 1.0) {
        return Err(AgoraError::InvalidArgument(format!(
            "need 0 <= theta_low <= theta_high <= 1, got ({theta_low}, {theta_high})"
        )));
    }
    let marketplace_part = welfare_marketplace(dist, theta_low, theta_high);
    let decentralized_part = welfare_decentralized(dist, theta_low, theta_high, p)?;
    Ok(WelfareDecomposition {
        marketplace_part,
        decentralized_part,
        total: marketplace_part + decentralized_part,
        search_only: welfare_search_only(dist, p)?,
        marketplace_only: marketplace_part,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assumption2Check {
    pub satisfied: bool,
    /// Left side minus right side.
    pub margin: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Sufficient condition for coexistence to beat the search market alone:
///
/// ```text
/// 2E[θF | θ̲ ≤ θ ≤ θ̄] + E[θ | θ > θ̄] ≥ E[θ | θ̲ ≤ θ ≤ θ̄] + E[θF | θ ≤ θ̲] + E[θF | θ ≥ θ̄]
/// ```
///
/// When `θ̲ = θ̄` the two middle terms are replaced by their limit at that point.
pub fn check_assumption2(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
) -> Result<Assumption2Check> {
    if !(0.0 < theta_low && theta_low <= theta_high && theta_high < 1.0) {
        return Err(AgoraError::InvalidArgument(format!(
            "need 0 < theta_low <= theta_high < 1, got ({theta_low}, {theta_high})"
        )));
    }
    let theta_f = |t: f64| t * dist.cdf(t);
    let (f_low, f_high) = (dist.cdf(theta_low), dist.cdf(theta_high));
    let middle = if f_high - f_low > 1e-12 {
        2.0 * dist.conditional_expectation(theta_low, theta_high, theta_f)?
            - dist.conditional_mean(theta_low, theta_high)?
    } else {
        2.0 * theta_f(theta_low) - theta_low
    };
    let upper_mean = dist.conditional_mean(theta_high, 1.0)?;
    let lower_tf = dist.conditional_expectation(0.0, theta_low, theta_f)?;
    let upper_tf = dist.conditional_expectation(theta_high, 1.0, theta_f)?;
    let lhs = middle + upper_mean;
    let rhs = lower_tf + upper_tf;
    let margin = lhs - rhs;
    Ok(Assumption2Check {
        satisfied: margin >= 0.0,
        margin,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffDrop {
    pub theta: f64,
    pub p_from: f64,
    pub p_to: f64,
    pub drop: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotonicitySweep {
    pub passes: bool,
    pub violations: Vec<PayoffDrop>,
    pub checked: usize,
}

/// Check that every type's equilibrium utility `max(u^m, u^d)` weakly rises
/// with the matching probability.
pub fn payoff_monotonicity_sweep(
    dist: &ValuationDistribution,
    p_grid: &[f64],
    theta_grid: &[f64],
) -> Result<MonotonicitySweep> {
    if p_grid.is_empty() || theta_grid.is_empty() {
        return Err(AgoraError::InvalidArgument("grids must be nonempty".into()));
    }
    if p_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AgoraError::InvalidArgument(
            "p grid must be increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let eq = solve_coexistence(dist, p, 1e-12)?;
        let row = theta_grid
            .iter()
            .map(|&t| {
                let ud = if p == 0.0 {
                    0.0
                } else {
                    search_payoff(dist, eq.theta_low, eq.theta_high, p, t)?
                };
                Ok(eq.mech.payoff(t).max(ud))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let mut violations = Vec::new();
    let mut checked = 0;
    for k in 1..rows.len() {
        for (j, &t) in theta_grid.iter().enumerate() {
            checked += 1;
            let drop = rows[k - 1][j] - rows[k][j];
            if drop > 1e-9 {
                violations.push(PayoffDrop {
                    theta: t,
                    p_from: p_grid[k - 1],
                    p_to: p_grid[k],
                    drop,
                });
            }
        }
    }
    Ok(MonotonicitySweep {
        passes: violations.is_empty(),
        violations,
        checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::interior_grid;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn uniform_values() {
        let u = ValuationDistribution::uniform();
        close(welfare_search_only(&u, 1.0).unwrap(), 1.0 / 6.0, 1e-12);
        close(welfare_search_only(&u, 0.5).unwrap(), 1.0 / 12.0, 1e-12);
        assert_eq!(welfare_search_only(&u, 0.0).unwrap(), 0.0);
        close(welfare_marketplace(&u, 0.25, 0.75), 3.0 / 16.0, 1e-12);
        close(welfare_marketplace(&u, 0.2, 0.8), 0.16, 1e-12);
        // Everyone trades at the median: E[θ; θ > ½] − E[θ; θ < ½].
        close(welfare_marketplace(&u, 0.5, 0.5), 0.25, 1e-12);
        let w = welfare_coexistence(&u, 0.25, 0.75, 1.0).unwrap();
        close(w.decentralized_part, 1.0 / 24.0, 1e-12);
        close(w.total, 11.0 / 48.0, 1e-12);
        assert!(w.total > w.marketplace_only && w.marketplace_only > w.search_only);
        close(
            welfare_coexistence(&u, 0.25, 0.75, 0.0).unwrap().total,
            3.0 / 16.0,
            1e-12,
        );
    }

    #[test]
    fn search_only_by_pair_integral() {
        // p/2 E|x − y| with x, y independent draws.
        let d = ValuationDistribution::beta(2.0, 3.0).unwrap();
        let inner = |x: f64| integrate(|y| (x - y).abs() * d.pdf(y), 0.0, 1.0);
        let direct = 0.5 * 0.7 * integrate(|x| inner(x) * d.pdf(x), 0.0, 1.0);
        close(welfare_search_only(&d, 0.7).unwrap(), direct, 1e-8);
    }

    #[test]
    fn assumption2_uniform_margin() {
        let u = ValuationDistribution::uniform();
        let c = check_assumption2(&u, 0.25, 0.75).unwrap();
        assert!(c.satisfied);
        close(c.margin, 0.125, 1e-9);
        let degenerate = check_assumption2(&u, 0.5, 0.5).unwrap();
        // E[θ|θ>½] − E[θF|θ≥½] − E[θF|θ≤½] = 3/4 − 7/12 − 1/12.
        close(degenerate.margin, 0.75 - 7.0 / 12.0 - 1.0 / 12.0, 1e-9);
    }

    #[test]
    fn monotone_in_p() {
        let u = ValuationDistribution::uniform();
        let grid = interior_grid(0.0, 1.0, 100);
        let r = payoff_monotonicity_sweep(&u, &[0.0, 0.5, 1.0], &grid).unwrap();
        assert!(r.passes, "{:?}", r.violations.first());
        assert!(payoff_monotonicity_sweep(&u, &[0.5], &grid).unwrap().passes);
        assert!(payoff_monotonicity_sweep(&u, &[0.5, 0.2], &grid).is_err());
    }
}
