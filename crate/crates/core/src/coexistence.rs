//! The marketplace alongside a search market: the simple equilibrium, its
//! bid-ask implementation, and the structural checks behind it.
//!
//! In the simple equilibrium the marketplace buys from types at or below
//! `θ̲`, sells to types at or above `θ̄`, and the types in between search.
//! The cutoffs do not depend on the matching probability `p`; only the
//! posted prices do, because the cutoff types must be compensated for
//! their outside option in the search market.

use serde::{Deserialize, Serialize};

use crate::distributions::ValuationDistribution;
use crate::error::{AgoraError, Result};
use crate::mechanism::{solve_baseline, virtual_surplus_closed_form, MechanismRule};
use crate::numeric::closed_grid;
use crate::search::{check_probability, search_payoff, search_payoff_general, SegmentationSpec};

/// Absolute slack in the payoff comparisons of the equilibrium checks.
pub const DEVIATION_TOL: f64 = 1e-9;

/// How far a located crossing may sit from its cutoff. Where the two
/// utilities touch tangentially the `DEVIATION_TOL` band is about
/// `√DEVIATION_TOL` wide, which bounds the attainable accuracy.
pub const CROSSING_TOL: f64 = 1e-4;

/// Decentralized trading protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// No search market (or `p = 0`).
    Baseline,
    Nash,
    DoubleAuction,
}

/// Equilibrium cutoffs, prices and profit decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub distribution: String,
    pub protocol: Protocol,
    pub p: f64,
    pub theta_low: f64,
    pub theta_high: f64,
    pub sell_price: f64,
    pub buy_price: f64,
    pub profit: f64,
    pub baseline_profit: f64,
    pub compensations: f64,
    pub virtual_surplus: f64,
    pub ratio: f64,
    /// Mean valuation of the searching types.
    pub segment_mean: f64,
    pub mech: MechanismRule,
}

impl EquilibriumReport {
    /// Equilibrium utility `max(u^m, u^d)` under Nash bargaining.
    pub fn nash_payoff(&self, dist: &ValuationDistribution, theta: f64) -> Result<f64> {
        let um = self.mech.payoff(theta);
        if self.p == 0.0 || self.theta_low >= self.theta_high {
            return Ok(um.max(0.0));
        }
        let ud = search_payoff(dist, self.theta_low, self.theta_high, self.p, theta)?;
        Ok(um.max(ud))
    }
}

/// Mean valuation on `[low, high]`; the point itself when the segment is
/// degenerate.
fn segment_mean(dist: &ValuationDistribution, low: f64, high: f64) -> Result<f64> {
    if high - low <= 0.0 {
        Ok(low)
    } else {
        dist.conditional_mean(low, high)
    }
}

/// Bid-ask prices that leave the cutoff types indifferent between the
/// marketplace and search: `p_s = (pE_d + (2−p)θ̲)/2`, `p_b = (pE_d + (2−p)θ̄)/2`.
pub fn posted_prices(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
    p: f64,
) -> Result<(f64, f64)> {
    check_probability(p)?;
    check_order(theta_low, theta_high)?;
    let mean = segment_mean(dist, theta_low, theta_high)?;
    Ok((
        0.5 * (p * mean + (2.0 - p) * theta_low),
        0.5 * (p * mean + (2.0 - p) * theta_high),
    ))
}

fn check_order(theta_low: f64, theta_high: f64) -> Result<()> {
    if 0.0 <= theta_low && theta_low <= theta_high && theta_high <= 1.0 {
        Ok(())
    } else {
        Err(AgoraError::InvalidArgument(format!(
            "need 0 <= theta_low <= theta_high <= 1, got ({theta_low}, {theta_high})"
        )))
    }
}

/// Profit decomposition at arbitrary feasible cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitBreakdown {
    pub profit: f64,
    pub compensations: f64,
    pub virtual_surplus: f64,
}

/// Profit of the marketplace that buys from `[0, θ̲]` and sells to `[θ̄, 1]`
/// while `(θ̲, θ̄)` searches.
///
/// Evaluated as revenue minus payments at the indifference prices, which
/// holds with or without measure balance:
/// `½[(2−p)(θ̄(1−F(θ̄)) − θ̲F(θ̲)) − p(F(θ̲) − (1−F(θ̄)))E_d]`.
/// Compensations are `F(θ̲)u^d(θ̲) + (1−F(θ̄))u^d(θ̄)`.
pub fn coexistence_profit_general(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
    p: f64,
) -> Result<ProfitBreakdown> {
    check_probability(p)?;
    check_order(theta_low, theta_high)?;
    let f_low = dist.cdf(theta_low);
    let f_high = dist.cdf(theta_high);
    if f_low < 1.0 - f_high - 1e-12 {
        return Err(AgoraError::Infeasible {
            f_low,
            one_minus_f_high: 1.0 - f_high,
        });
    }
    let mean = segment_mean(dist, theta_low, theta_high)?;
    let sellers = theta_high * (1.0 - f_high) - theta_low * f_low;
    let profit = 0.5 * ((2.0 - p) * sellers - p * (f_low - (1.0 - f_high)) * mean);
    let compensations =
        0.5 * p * (f_low * (mean - theta_low) + (1.0 - f_high) * (theta_high - mean));
    let virtual_surplus = virtual_surplus_closed_form(dist, theta_low, theta_high);
    Ok(ProfitBreakdown {
        profit,
        compensations,
        virtual_surplus,
    })
}

/// Solve the simple equilibrium with Nash bargaining in the search market.
pub fn solve_coexistence(
    dist: &ValuationDistribution,
    p: f64,
    tol: f64,
) -> Result<EquilibriumReport> {
    check_probability(p)?;
    let base = solve_baseline(dist, tol)?;
    let (theta_low, theta_high) = (base.theta_low, base.theta_high);
    let (sell_price, buy_price) = posted_prices(dist, theta_low, theta_high, p)?;
    let parts = coexistence_profit_general(dist, theta_low, theta_high, p)?;
    let mech = MechanismRule::bid_ask(sell_price, buy_price)?;
    Ok(EquilibriumReport {
        distribution: dist.to_string(),
        protocol: if p == 0.0 {
            Protocol::Baseline
        } else {
            Protocol::Nash
        },
        p,
        theta_low,
        theta_high,
        sell_price,
        buy_price,
        profit: parts.profit,
        baseline_profit: base.profit,
        compensations: parts.compensations,
        virtual_surplus: parts.virtual_surplus,
        ratio: parts.profit / base.profit,
        segment_mean: dist.conditional_mean(theta_low, theta_high)?,
        mech,
    })
}

/// Result of comparing marketplace and search utilities type by type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationReport {
    pub passes: bool,
    /// Largest amount by which some type prefers the market it is not
    /// assigned to.
    pub max_violation: f64,
    pub violation_at: Option<f64>,
    /// Points where the marketplace stops being strictly preferred.
    pub crossings: Vec<f64>,
    pub crossings_match: bool,
    pub marketplace_at_low: f64,
    pub outside_at_low: f64,
    pub grid_size: usize,
}

/// Check that no type gains by switching markets: `u^m ≥ u^d` on
/// `[0, θ̲] ∪ [θ̄, 1]` and `u^d ≥ u^m` inside, and that the marketplace stops
/// being strictly preferred exactly at the cutoffs.
pub fn verify_no_profitable_deviation(
    dist: &ValuationDistribution,
    report: &EquilibriumReport,
    p: f64,
    grid_n: usize,
) -> Result<DeviationReport> {
    check_probability(p)?;
    let (lo, hi) = (report.theta_low, report.theta_high);
    let outside = |t: f64| -> f64 {
        if p == 0.0 {
            0.0
        } else {
            search_payoff(dist, lo, hi, p, t).unwrap_or(f64::NAN)
        }
    };
    Ok(verify_against(&report.mech, lo, hi, outside, grid_n))
}

/// Shared deviation scan for any outside-option curve.
pub(crate) fn verify_against<U: Fn(f64) -> f64>(
    mech: &MechanismRule,
    lo: f64,
    hi: f64,
    outside: U,
    grid_n: usize,
) -> DeviationReport {
    let grid_n = grid_n.max(100);
    let diff = |t: f64| mech.payoff(t) - outside(t);
    let grid = closed_grid(0.0, 1.0, grid_n);
    let mut max_violation = 0.0f64;
    let mut violation_at = None;
    let mut record = |gap: f64, t: f64| {
        if gap > max_violation {
            max_violation = gap;
            violation_at = Some(t);
        }
    };
    let diffs: Vec<f64> = grid.iter().map(|&t| diff(t)).collect();
    for (&t, &d) in grid.iter().zip(&diffs) {
        if t <= lo || t >= hi {
            record(-d, t);
        } else {
            record(d, t);
        }
    }
    for &t in &[lo, hi] {
        record(diff(t).abs(), t);
    }

    // Crossings are the edges of the regions where one market is strictly
    // preferred, refined by bisection. Either region can be empty (no search
    // at p = 0, exact indifference below the cutoff in some protocols), so
    // both are scanned and nearby edges merged.
    let mut crossings: Vec<f64> = Vec::new();
    for sign in [1.0, -1.0] {
        let strict = |d: f64| sign * d > DEVIATION_TOL;
        for i in 0..grid.len() - 1 {
            let left_strict = strict(diffs[i]);
            if left_strict == strict(diffs[i + 1]) {
                continue;
            }
            let (mut a, mut b) = (grid[i], grid[i + 1]);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if strict(diff(m)) == left_strict {
                    a = m;
                } else {
                    b = m;
                }
            }
            let c = 0.5 * (a + b);
            if crossings.iter().all(|&x| (x - c).abs() > CROSSING_TOL) {
                crossings.push(c);
            }
        }
    }
    crossings.sort_by(f64::total_cmp);
    let crossings_match = crossings.len() == 2
        && (crossings[0] - lo).abs() < CROSSING_TOL
        && (crossings[1] - hi).abs() < CROSSING_TOL;
    DeviationReport {
        passes: max_violation <= DEVIATION_TOL && crossings_match,
        max_violation,
        violation_at,
        crossings,
        crossings_match,
        marketplace_at_low: mech.payoff(lo),
        outside_at_low: outside(lo),
        grid_size: grid_n,
    }
}

/// Indifference residuals for inviting the strict superset `[0, a] ∪ [b, 1]`
/// of marketplace types while the designer intends `(θ̲, θ̄)` to search.
///
/// `r1 = u^d(a; (a, b)) − [u^d(θ̲; (θ̲, θ̄)) + θ̲ − a]` and symmetrically `r2`
/// at `b`. Such a segmentation would be an equilibrium only if both vanish,
/// which requires `p = 2`.
pub fn obedience_residuals(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
    a: f64,
    b: f64,
    p: f64,
) -> Result<(f64, f64)> {
    check_probability(p)?;
    if !(0.0 < a && a <= theta_low && theta_low < theta_high && theta_high <= b && b < 1.0) {
        return Err(AgoraError::InvalidArgument(format!(
            "need 0 < a <= theta_low < theta_high <= b < 1, got a = {a}, cutoffs ({theta_low}, {theta_high}), b = {b}"
        )));
    }
    let r1 = search_payoff(dist, a, b, p, a)?
        - (search_payoff(dist, theta_low, theta_high, p, theta_low)? + theta_low - a);
    let r2 = search_payoff(dist, a, b, p, b)?
        - (search_payoff(dist, theta_low, theta_high, p, theta_high)? + b - theta_high);
    Ok((r1, r2))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObedienceScan {
    /// Smallest `max(|r1|, |r2|)` over the grid.
    pub min_residual: f64,
    pub argmin: (f64, f64, f64),
    pub evaluated: usize,
}

/// Scan the obedience residuals over `a_i = θ̲·i/(n+1)`,
/// `b_j = θ̄ + (1−θ̄)·j/(n+1)` for `i, j = 1..=n`, and the given `p` values.
pub fn obedience_scan(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
    n: usize,
    p_grid: &[f64],
) -> Result<ObedienceScan> {
    let step = 1.0 / (n + 1) as f64;
    let mut best = ObedienceScan {
        min_residual: f64::INFINITY,
        argmin: (f64::NAN, f64::NAN, f64::NAN),
        evaluated: 0,
    };
    for i in 1..=n {
        let a = theta_low * i as f64 * step;
        for j in 1..=n {
            let b = theta_high + (1.0 - theta_high) * j as f64 * step;
            for &p in p_grid {
                let (r1, r2) = obedience_residuals(dist, theta_low, theta_high, a, b, p)?;
                let r = r1.abs().max(r2.abs());
                best.evaluated += 1;
                if r < best.min_residual {
                    best.min_residual = r;
                    best.argmin = (a, b, p);
                }
            }
        }
    }
    Ok(best)
}

/// Profit when `[θ̲, a] ∪ [b, θ̄]` searches and `(a, b)` rejoins the
/// marketplace as non-traders who must be compensated.
///
/// `Π = VS(θ̲, θ̄) − F(θ̲)u^d(θ̲) − (1−F(θ̄))u^d(θ̄) − (F(b)−F(a))u^d(a)`.
pub fn two_interval_profit(
    dist: &ValuationDistribution,
    theta_low: f64,
    a: f64,
    b: f64,
    theta_high: f64,
    p: f64,
) -> Result<f64> {
    check_probability(p)?;
    if !(0.0 <= theta_low && theta_low <= a && a <= b && b <= theta_high && theta_high <= 1.0) {
        return Err(AgoraError::InvalidArgument(format!(
            "need theta_low <= a <= b <= theta_high, got ({theta_low}, {a}, {b}, {theta_high})"
        )));
    }
    let (f_low, f_a, f_b, f_high) = (
        dist.cdf(theta_low),
        dist.cdf(a),
        dist.cdf(b),
        dist.cdf(theta_high),
    );
    let below = f_a - f_low;
    let above = f_high - f_b;
    if (below - above).abs() > 1e-9 {
        return Err(AgoraError::Unbalanced { below, above });
    }
    if (f_low - (1.0 - f_high)).abs() > 1e-9 {
        return Err(AgoraError::Unbalanced {
            below: f_low,
            above: 1.0 - f_high,
        });
    }
    let vs = virtual_surplus_closed_form(dist, theta_low, theta_high);
    if below + above <= 1e-14 {
        // Nobody searches; every type is in the marketplace.
        return Ok(vs);
    }
    let seg = if f_b - f_a <= 0.0 {
        SegmentationSpec::interval(theta_low, theta_high, p)?
    } else {
        SegmentationSpec::new(vec![(theta_low, a), (b, theta_high)], p)?
    };
    let u = |t: f64| search_payoff_general(dist, &seg, t);
    Ok(vs - f_low * u(theta_low)? - (1.0 - f_high) * u(theta_high)? - (f_b - f_a) * u(a)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominanceScan {
    pub best_a: f64,
    pub best_b: f64,
    pub best_profit: f64,
    pub interval_profit: f64,
    pub grid_step: f64,
    pub evaluated: usize,
    /// The best pair is the single interval `a = b` up to one grid step.
    pub interval_is_best: bool,
}

/// Evaluate [`two_interval_profit`] over `n` measure-balanced pairs:
/// `a` runs over `n` evenly spaced points in `(θ̲, m]` and `b` is the type
/// that balances the two searching intervals.
pub fn two_interval_scan(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
    p: f64,
    n: usize,
) -> Result<DominanceScan> {
    let f_low = dist.cdf(theta_low);
    let f_high = dist.cdf(theta_high);
    let f_mid = 0.5 * (f_low + f_high);
    let median = dist.quantile(f_mid);
    let step = (median - theta_low) / n as f64;
    let mut scan = DominanceScan {
        best_a: f64::NAN,
        best_b: f64::NAN,
        best_profit: f64::NEG_INFINITY,
        interval_profit: two_interval_profit(dist, theta_low, median, median, theta_high, p)?,
        grid_step: step,
        evaluated: 0,
        interval_is_best: false,
    };
    for i in 1..=n {
        let a = if i == n {
            median
        } else {
            theta_low + step * i as f64
        };
        let b = if i == n {
            median
        } else {
            dist.quantile(f_high - (dist.cdf(a) - f_low)).max(a)
        };
        let profit = two_interval_profit(dist, theta_low, a, b, theta_high, p)?;
        scan.evaluated += 1;
        if profit > scan.best_profit {
            scan.best_profit = profit;
            scan.best_a = a;
            scan.best_b = b;
        }
    }
    scan.interval_is_best = (scan.best_a - median).abs() <= step + 1e-12
        && scan.best_profit <= scan.interval_profit + 1e-12;
    Ok(scan)
}

/// Gap between the extreme types' utilities when the coexistence mechanism
/// runs and when everyone searches: `[u^m(0) + u^m(1)] − [u^d(0) + u^d(1)]`.
/// Positive whenever `p < 2`, so full decentralization is never an
/// equilibrium.
pub fn full_decentralization_margin(dist: &ValuationDistribution, p: f64) -> Result<f64> {
    let eq = solve_coexistence(dist, p, 1e-12)?;
    let um = eq.mech.payoff(0.0) + eq.mech.payoff(1.0);
    let ud = search_payoff(dist, 0.0, 1.0, p, 0.0)? + search_payoff(dist, 0.0, 1.0, p, 1.0)?;
    Ok(um - ud)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn uniform_equilibria() {
        let u = ValuationDistribution::uniform();
        let eq = solve_coexistence(&u, 1.0, 1e-12).unwrap();
        close(eq.theta_low, 0.25, 1e-10);
        close(eq.profit, 0.0625, 1e-10);
        close(eq.compensations, 0.0625, 1e-10);
        close(eq.ratio, 0.5, 1e-10);
        close(eq.compensations + eq.profit, eq.virtual_surplus, 1e-12);

        let eq0 = solve_coexistence(&u, 0.0, 1e-12).unwrap();
        close(eq0.profit, 0.125, 1e-10);
        assert_eq!(eq0.compensations, 0.0);
        assert_eq!(eq0.protocol, Protocol::Baseline);
    }

    #[test]
    fn beta_ratio() {
        let d = ValuationDistribution::beta(2.0, 2.0).unwrap();
        let eq = solve_coexistence(&d, 0.5, 1e-12).unwrap();
        close(eq.theta_low, (12.0 - 48f64.sqrt()) / 16.0, 1e-8);
        close(eq.ratio, 0.75, 1e-6);
    }

    #[test]
    fn price_examples() {
        let u = ValuationDistribution::uniform();
        let (s, b) = posted_prices(&u, 0.25, 0.75, 1.0).unwrap();
        close(s, 0.375, 1e-12);
        close(b, 0.625, 1e-12);
        let (s, b) = posted_prices(&u, 0.25, 0.75, 0.0).unwrap();
        close(s, 0.25, 1e-15);
        close(b, 0.75, 1e-15);
        let (s, b) = posted_prices(&u, 0.2, 0.8, 1.0).unwrap();
        close(s, 0.35, 1e-12);
        close(b, 0.65, 1e-12);
    }

    #[test]
    fn profit_examples() {
        let u = ValuationDistribution::uniform();
        let r = coexistence_profit_general(&u, 0.2, 0.8, 1.0).unwrap();
        close(r.compensations, 0.06, 1e-12);
        close(r.profit, 0.06, 1e-12);
        close(r.virtual_surplus, 0.12, 1e-12);
        close(
            coexistence_profit_general(&u, 0.25, 0.75, 0.5)
                .unwrap()
                .profit,
            0.09375,
            1e-12,
        );
        let r = coexistence_profit_general(&u, 0.5, 0.5, 0.7).unwrap();
        assert!(
            r.profit.abs() < 1e-15
                && r.compensations.abs() < 1e-15
                && r.virtual_surplus.abs() < 1e-15
        );
        assert!(matches!(
            coexistence_profit_general(&u, 0.2, 0.7, 1.0),
            Err(AgoraError::Infeasible { .. })
        ));
        // Unbalanced but feasible: profit still equals surplus minus compensations.
        let r = coexistence_profit_general(&u, 0.3, 0.75, 0.8).unwrap();
        close(r.profit, r.virtual_surplus - r.compensations, 1e-12);
    }

    #[test]
    fn profit_falls_in_theta_low_along_feasibility() {
        let d = ValuationDistribution::trunc_exp(1.0).unwrap();
        let prof = |t: f64| {
            let high = crate::mechanism::balanced_high(&d, t);
            coexistence_profit_general(&d, t, high, 0.6).unwrap().profit
        };
        let eq = solve_coexistence(&d, 0.6, 1e-12).unwrap();
        // Above the optimum the balanced profit falls as θ̲ rises.
        let mut t = eq.theta_low + 0.01;
        while t < d.median() - 0.02 {
            assert!(prof(t + 0.01) < prof(t));
            t += 0.01;
        }
    }

    #[test]
    fn deviation_checks() {
        let u = ValuationDistribution::uniform();
        let eq = solve_coexistence(&u, 1.0, 1e-12).unwrap();
        let r = verify_no_profitable_deviation(&u, &eq, 1.0, 2001).unwrap();
        assert!(r.passes, "{r:?}");
        close(r.crossings[0], 0.25, 1e-8);
        close(r.crossings[1], 0.75, 1e-8);
        close(r.marketplace_at_low, 0.125, 1e-10);
        close(r.outside_at_low, 0.125, 1e-10);

        let eq0 = solve_coexistence(&u, 0.0, 1e-12).unwrap();
        assert!(
            verify_no_profitable_deviation(&u, &eq0, 0.0, 1001)
                .unwrap()
                .passes
        );

        let mut bad = eq.clone();
        bad.mech = MechanismRule::bid_ask(0.35, 0.625).unwrap();
        let r = verify_no_profitable_deviation(&u, &bad, 1.0, 1001).unwrap();
        assert!(!r.passes);
        assert!(r.violation_at.unwrap() <= 0.25);
    }

    #[test]
    fn obedience_examples() {
        let u = ValuationDistribution::uniform();
        let (r1, r2) = obedience_residuals(&u, 0.25, 0.75, 0.2, 0.8, 1.0).unwrap();
        close(r1, -0.025, 1e-12);
        close(r2, -0.025, 1e-12);
        let (r1, r2) = obedience_residuals(&u, 0.25, 0.75, 0.25, 0.75, 0.4).unwrap();
        close(r1, 0.0, 1e-12);
        close(r2, 0.0, 1e-12);
        assert!(obedience_residuals(&u, 0.25, 0.75, 0.3, 0.8, 1.0).is_err());
        let p_grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let scan = obedience_scan(&u, 0.25, 0.75, 10, &p_grid).unwrap();
        assert!(scan.min_residual > 1e-3);
    }

    #[test]
    fn two_interval_examples() {
        let u = ValuationDistribution::uniform();
        close(
            two_interval_profit(&u, 0.25, 0.5, 0.5, 0.75, 1.0).unwrap(),
            0.0625,
            1e-12,
        );
        close(
            two_interval_profit(&u, 0.25, 0.4, 0.6, 0.75, 1.0).unwrap(),
            0.045,
            1e-12,
        );
        assert!(matches!(
            two_interval_profit(&u, 0.25, 0.4, 0.7, 0.75, 1.0),
            Err(AgoraError::Unbalanced { .. })
        ));
        let scan = two_interval_scan(&u, 0.25, 0.75, 1.0, 200).unwrap();
        assert!(scan.interval_is_best, "{scan:?}");
    }

    #[test]
    fn decentralization_margins() {
        let u = ValuationDistribution::uniform();
        close(full_decentralization_margin(&u, 1.0).unwrap(), 0.25, 1e-10);
        close(full_decentralization_margin(&u, 0.0).unwrap(), 0.5, 1e-10);
        let d = ValuationDistribution::beta(2.0, 2.0).unwrap();
        close(
            full_decentralization_margin(&d, 1.0).unwrap(),
            (12.0 - 48f64.sqrt()) / 16.0,
            1e-8,
        );
    }

    #[test]
    fn report_round_trips_through_json() {
        let eq = solve_coexistence(&ValuationDistribution::uniform(), 0.4, 1e-12).unwrap();
        let s = serde_json::to_string(&eq).unwrap();
        let back: EquilibriumReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.mech, eq.mech);
        assert_eq!(back.profit, eq.profit);
        assert!(s.contains("\"breakpoints\""));
    }
}
