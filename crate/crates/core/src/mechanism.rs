//! Direct mechanisms with unit allocations, their incentive checks, and the
//! optimal marketplace when no decentralized market exists.

use serde::{Deserialize, Serialize};

use crate::distributions::{ValuationDistribution, ENDPOINT_GUARD};
use crate::error::{AgoraError, Result};
use crate::numeric::{bisect, closed_grid, golden_max, integrate};

/// Slack allowed when comparing utilities and transfers.
pub const INCENTIVE_TOL: f64 = 1e-9;

/// A deterministic direct mechanism: piecewise-constant allocation in
/// {−1, 0, +1} and a transfer per segment.
///
/// Segment `k` covers `[breakpoints[k], breakpoints[k + 1])`; the last
/// segment runs to 1. A type belongs to the last segment whose left
/// breakpoint is at or below it. Positive transfers are paid by the agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismRule {
    pub breakpoints: Vec<f64>,
    pub allocations: Vec<i8>,
    pub transfers: Vec<f64>,
}

impl MechanismRule {
    pub fn new(breakpoints: Vec<f64>, allocations: Vec<i8>, transfers: Vec<f64>) -> Result<Self> {
        let n = breakpoints.len();
        if n == 0 || allocations.len() != n || transfers.len() != n {
            return Err(AgoraError::InvalidArgument(
                "mechanism needs one allocation and one transfer per breakpoint".into(),
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(AgoraError::InvalidArgument(
                "first breakpoint must be 0".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints[n - 1] > 1.0 {
            return Err(AgoraError::InvalidArgument(
                "breakpoints must be strictly increasing in [0, 1]".into(),
            ));
        }
        if allocations.iter().any(|q| !(-1..=1).contains(q)) {
            return Err(AgoraError::InvalidArgument(
                "allocations must lie in {-1, 0, 1}".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            allocations,
            transfers,
        })
    }

    /// Bid-ask implementation: sell at `sell_price` for θ ≤ `sell_price`,
    /// buy at `buy_price` for θ ≥ `buy_price`, no trade in between.
    pub fn bid_ask(sell_price: f64, buy_price: f64) -> Result<Self> {
        Self::with_cutoffs(sell_price, buy_price, sell_price, buy_price)
    }

    /// Posted prices with explicit allocation cutoffs: types ≤ `sell_cutoff`
    /// sell at `sell_price`, types ≥ `buy_cutoff` buy at `buy_price`.
    pub fn with_cutoffs(
        sell_cutoff: f64,
        buy_cutoff: f64,
        sell_price: f64,
        buy_price: f64,
    ) -> Result<Self> {
        if !(0.0 <= sell_cutoff && sell_cutoff < buy_cutoff && buy_cutoff <= 1.0) {
            return Err(AgoraError::InvalidArgument(format!(
                "need 0 <= sell cutoff < buy cutoff <= 1, got ({sell_cutoff}, {buy_cutoff})"
            )));
        }
        // The sell cutoff itself belongs to the selling segment.
        let no_trade_start = sell_cutoff.next_up();
        if no_trade_start < buy_cutoff {
            Self::new(
                vec![0.0, no_trade_start, buy_cutoff],
                vec![-1, 0, 1],
                vec![-sell_price, 0.0, buy_price],
            )
        } else {
            Self::new(
                vec![0.0, buy_cutoff],
                vec![-1, 1],
                vec![-sell_price, buy_price],
            )
        }
    }

    pub fn segment_index(&self, theta: f64) -> usize {
        self.breakpoints
            .partition_point(|&b| b <= theta)
            .saturating_sub(1)
    }

    pub fn allocation(&self, theta: f64) -> i8 {
        self.allocations[self.segment_index(theta)]
    }

    pub fn transfer(&self, theta: f64) -> f64 {
        self.transfers[self.segment_index(theta)]
    }

    /// Net utility `θ q(θ) − t(θ)` of truthful participation.
    pub fn payoff(&self, theta: f64) -> f64 {
        let k = self.segment_index(theta);
        theta * self.allocations[k] as f64 - self.transfers[k]
    }

    /// `u(0) + ∫₀^θ q(x) dx`, the utility implied by the envelope condition.
    pub fn envelope_payoff(&self, theta: f64) -> f64 {
        let mut u = -self.transfers[0];
        for (k, &left) in self.breakpoints.iter().enumerate() {
            if left >= theta {
                break;
            }
            let right = self
                .breakpoints
                .get(k + 1)
                .copied()
                .unwrap_or(1.0)
                .min(theta);
            u += self.allocations[k] as f64 * (right - left);
        }
        u
    }

    /// Transfer per segment that revenue equivalence implies given `u(0)`.
    fn revenue_equivalent_transfers(&self) -> Vec<f64> {
        let u0 = -self.transfers[0];
        let mut integral = 0.0;
        let mut out = Vec::with_capacity(self.breakpoints.len());
        for (k, &left) in self.breakpoints.iter().enumerate() {
            if k > 0 {
                integral += self.allocations[k - 1] as f64 * (left - self.breakpoints[k - 1]);
            }
            out.push(self.allocations[k] as f64 * left - u0 - integral);
        }
        out
    }
}

/// Which incentive property failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Allocation decreases across a breakpoint.
    Monotonicity,
    /// A type gains by reporting another grid type.
    Misreport,
    /// A segment's transfer differs from the revenue-equivalence formula.
    TransferFormula,
    /// The participation constraint fails at the critical type.
    Participation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub theta: f64,
    pub reported: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IncentiveReport {
    pub passes: bool,
    pub first_violation: Option<Violation>,
    pub checked_pairs: usize,
    /// Every kind of violation found, in check order.
    pub kinds: Vec<ViolationKind>,
    /// Critical type of the participation check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<f64>,
    /// Lowest truthful utility on the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_utility: Option<f64>,
}

impl IncentiveReport {
    fn from_violations(violations: Vec<Violation>, checked_pairs: usize) -> Self {
        let mut kinds: Vec<ViolationKind> = Vec::new();
        for v in &violations {
            if !kinds.contains(&v.kind) {
                kinds.push(v.kind);
            }
        }
        Self {
            passes: violations.is_empty(),
            first_violation: violations.first().copied(),
            checked_pairs,
            kinds,
            theta_star: None,
            min_utility: None,
        }
    }
}

/// Monotone allocation, revenue-equivalent transfers, and no profitable
/// misreport among `grid_n` evenly spaced types.
pub fn check_incentive_compatibility(mech: &MechanismRule, grid_n: usize) -> IncentiveReport {
    let grid_n = grid_n.max(100);
    let mut violations = Vec::new();

    for k in 1..mech.allocations.len() {
        let drop = mech.allocations[k - 1] - mech.allocations[k];
        if drop > 0 {
            let b = mech.breakpoints[k];
            violations.push(Violation {
                kind: ViolationKind::Monotonicity,
                theta: b,
                reported: b,
                gain: drop as f64,
            });
        }
    }

    let grid = closed_grid(0.0, 1.0, grid_n);
    let offers: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|&r| (r, mech.allocation(r) as f64, mech.transfer(r)))
        .collect();
    let mut misreport = None;
    for &theta in &grid {
        let truthful = mech.payoff(theta);
        let (best_report, best) =
            offers
                .iter()
                .map(|&(r, q, t)| (r, theta * q - t))
                .fold(
                    (theta, truthful),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                );
        if best - truthful > INCENTIVE_TOL {
            misreport = Some(Violation {
                kind: ViolationKind::Misreport,
                theta,
                reported: best_report,
                gain: best - truthful,
            });
            break;
        }
    }
    violations.extend(misreport);

    let implied = mech.revenue_equivalent_transfers();
    for (k, (&t, &t_hat)) in mech.transfers.iter().zip(&implied).enumerate() {
        if (t - t_hat).abs() > INCENTIVE_TOL {
            let b = mech.breakpoints[k];
            violations.push(Violation {
                kind: ViolationKind::TransferFormula,
                theta: b,
                reported: b,
                gain: t_hat - t,
            });
            break;
        }
    }

    IncentiveReport::from_violations(violations, grid_n * grid_n)
}

/// Locate the type with the lowest utility of an IC mechanism and check
/// that it participates voluntarily.
///
/// If `q(0) ≥ 0` the critical type is 0; if `q(1) < 0` it is 1; otherwise
/// it is where the allocation crosses zero.
pub fn check_individual_rationality(mech: &MechanismRule, grid_n: usize) -> IncentiveReport {
    let grid_n = grid_n.max(100);
    let first = mech.allocations[0];
    let last = *mech.allocations.last().unwrap();
    let theta_star = if first >= 0 {
        0.0
    } else if last < 0 {
        1.0
    } else {
        let k = mech.allocations.iter().position(|&q| q >= 0).unwrap();
        if mech.allocations[k] == 0 {
            let left = mech.breakpoints[k];
            let right = mech.breakpoints.get(k + 1).copied().unwrap_or(1.0);
            0.5 * (left + right)
        } else {
            mech.breakpoints[k]
        }
    };
    let u_star = mech.payoff(theta_star);
    let min_utility = closed_grid(0.0, 1.0, grid_n)
        .into_iter()
        .map(|t| mech.payoff(t))
        .fold(f64::INFINITY, f64::min);
    let violations = if u_star < -INCENTIVE_TOL {
        vec![Violation {
            kind: ViolationKind::Participation,
            theta: theta_star,
            reported: theta_star,
            gain: -u_star,
        }]
    } else {
        Vec::new()
    };
    let mut report = IncentiveReport::from_violations(violations, grid_n);
    report.theta_star = Some(theta_star);
    report.min_utility = Some(min_utility);
    report
}

/// Optimal marketplace on its own: buy from types ≤ `theta_low`, sell to
/// types ≥ `theta_high`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineSolution {
    pub theta_low: f64,
    pub theta_high: f64,
    pub sell_price: f64,
    pub buy_price: f64,
    pub profit: f64,
}

impl BaselineSolution {
    pub fn mechanism(&self) -> MechanismRule {
        MechanismRule::bid_ask(self.sell_price, self.buy_price)
            .expect("baseline cutoffs are ordered")
    }
}

/// `F(θ̲)(θ̄ − θ̲)` with θ̄ chosen so that the market clears.
pub(crate) fn balanced_high(dist: &ValuationDistribution, theta_low: f64) -> f64 {
    dist.quantile(1.0 - dist.cdf(theta_low))
}

/// Maximize `F(θ̲)(θ̄ − θ̲)` subject to `F(θ̲) = 1 − F(θ̄)`.
///
/// A golden-section pass brackets the maximizer; bisection on the first-order
/// residual `V(θ̄) − C(θ̲)` then refines it to `tol`.
pub fn solve_baseline(dist: &ValuationDistribution, tol: f64) -> Result<BaselineSolution> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(AgoraError::InvalidArgument(format!(
            "tolerance must lie in [1e-12, 1e-6], got {tol}"
        )));
    }
    dist.require_regular()?;
    let (lo, _) = dist.support();
    let median = dist.median();
    let left = lo + ENDPOINT_GUARD;
    if !(left < median) {
        return Err(AgoraError::SolverFailure(
            "median too close to the lower support".into(),
        ));
    }
    let objective = |t: f64| dist.cdf(t) * (balanced_high(dist, t) - t);
    let (g_lo, g_hi) = golden_max(objective, left, median, 1e-4);

    let residual = |t: f64| -> f64 {
        let high = balanced_high(dist, t);
        match (dist.virtual_value(high), dist.virtual_cost(t)) {
            (Ok(v), Ok(c)) => v - c,
            _ => f64::NAN,
        }
    };
    let widen = 1e-3;
    let bracket_lo = (g_lo - widen).max(left);
    let bracket_hi = (g_hi + widen).min(median);
    let theta_low = bisect(residual, bracket_lo, bracket_hi, tol)
        .or_else(|_| bisect(residual, left, median, tol))
        .or_else(|_| {
            let (a, b) = golden_max(objective, left, median, tol);
            Ok::<f64, AgoraError>(0.5 * (a + b))
        })?;
    let theta_high = balanced_high(dist, theta_low);
    let profit = dist.cdf(theta_low) * (theta_high - theta_low);
    if !(profit > 0.0) || !(theta_low < theta_high) {
        return Err(AgoraError::SolverFailure(format!(
            "no interior maximizer (theta_low = {theta_low}, theta_high = {theta_high})"
        )));
    }
    Ok(BaselineSolution {
        theta_low,
        theta_high,
        sell_price: theta_low,
        buy_price: theta_high,
        profit,
    })
}

/// Closed form `−θ̲F(θ̲) − θ̄F(θ̄) + θ̄` of the virtual surplus.
pub fn virtual_surplus_closed_form(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
) -> f64 {
    -theta_low * dist.cdf(theta_low) - theta_high * dist.cdf(theta_high) + theta_high
}

/// `−∫₀^θ̲ C f + ∫_θ̄¹ V f`, by quadrature.
pub fn virtual_surplus_quadrature(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
) -> f64 {
    // C f = x f + F and V f = x f − (1 − F); neither needs a division by f.
    let sellers = integrate(|x| x * dist.pdf(x) + dist.cdf(x), 0.0, theta_low);
    let buyers = integrate(|x| x * dist.pdf(x) - (1.0 - dist.cdf(x)), theta_high, 1.0);
    buyers - sellers
}

/// Expected virtual value of buyers above `theta_high` minus expected virtual
/// cost of sellers below `theta_low`.
///
/// Evaluated by quadrature and in closed form; the two must agree to 1e-8.
pub fn virtual_surplus(
    dist: &ValuationDistribution,
    theta_low: f64,
    theta_high: f64,
) -> Result<f64> {
    if !(0.0 <= theta_low && theta_low <= theta_high && theta_high <= 1.0) {
        return Err(AgoraError::InvalidArgument(format!(
            "need 0 <= theta_low <= theta_high <= 1, got ({theta_low}, {theta_high})"
        )));
    }
    let closed = virtual_surplus_closed_form(dist, theta_low, theta_high);
    let quad = virtual_surplus_quadrature(dist, theta_low, theta_high);
    if (closed - quad).abs() > 1e-8 {
        return Err(AgoraError::SolverFailure(format!(
            "virtual surplus cross-check failed: closed form {closed}, quadrature {quad}"
        )));
    }
    Ok(closed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_baseline_mech() -> MechanismRule {
        MechanismRule::bid_ask(0.25, 0.75).unwrap()
    }

    #[test]
    fn uniform_baseline() {
        let sol = solve_baseline(&ValuationDistribution::uniform(), 1e-12).unwrap();
        assert!((sol.theta_low - 0.25).abs() < 1e-10);
        assert!((sol.theta_high - 0.75).abs() < 1e-10);
        assert!((sol.profit - 0.125).abs() < 1e-12);
    }

    #[test]
    fn tolerance_out_of_range() {
        let u = ValuationDistribution::uniform();
        assert!(solve_baseline(&u, 1e-3).is_err());
        assert!(solve_baseline(&u, 1e-13).is_err());
    }

    #[test]
    fn non_regular_is_refused() {
        let d = ValuationDistribution::piecewise(&[0.25, 0.75], &[1.9, 0.1, 1.9]).unwrap();
        assert!(matches!(
            solve_baseline(&d, 1e-10),
            Err(AgoraError::NotRegular { .. })
        ));
    }

    #[test]
    fn virtual_surplus_examples() {
        let u = ValuationDistribution::uniform();
        assert!((virtual_surplus(&u, 0.25, 0.75).unwrap() - 0.125).abs() < 1e-12);
        assert!((virtual_surplus(&u, 0.2, 0.8).unwrap() - 0.12).abs() < 1e-12);
        assert!(virtual_surplus(&u, 0.5, 0.5).unwrap().abs() < 1e-12);
        assert!(virtual_surplus(&u, 0.6, 0.5).is_err());
        let b = ValuationDistribution::beta(2.0, 2.0).unwrap();
        assert!(virtual_surplus(&b, 0.5, 0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn payoff_examples() {
        let m = uniform_baseline_mech();
        assert!((m.payoff(0.1) - 0.15).abs() < 1e-15);
        assert_eq!(m.payoff(0.5), 0.0);
        assert!((m.payoff(0.8) - 0.05).abs() < 1e-15);
        for &t in &[0.0, 0.1, 0.25, 0.3, 0.75, 0.9, 1.0] {
            assert!((m.payoff(t) - m.envelope_payoff(t)).abs() < 1e-10, "{t}");
        }
        assert_eq!(m.allocation(0.25), -1);
        assert_eq!(m.allocation(0.75), 1);
    }

    #[test]
    fn json_layout() {
        let m = MechanismRule::new(vec![0.0, 0.5], vec![-1, 1], vec![-0.5, 0.5]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"breakpoints":[0.0,0.5],"allocations":[-1,1],"transfers":[-0.5,0.5]}"#
        );
        let back: MechanismRule = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn incentive_examples() {
        let m = uniform_baseline_mech();
        let r = check_incentive_compatibility(&m, 1001);
        assert!(r.passes, "{:?}", r.first_violation);

        let bad =
            MechanismRule::new(vec![0.0, 0.3, 0.6], vec![-1, 1, 0], vec![-0.3, 0.3, 0.0]).unwrap();
        let r = check_incentive_compatibility(&bad, 200);
        assert!(!r.passes);
        assert_eq!(r.first_violation.unwrap().kind, ViolationKind::Monotonicity);

        let mut cheap = uniform_baseline_mech();
        cheap.transfers[2] = 0.70;
        let r = check_incentive_compatibility(&cheap, 1001);
        assert!(!r.passes);
        let v = r.first_violation.unwrap();
        assert_eq!(v.kind, ViolationKind::Misreport);
        assert!(v.theta > 0.70 && v.theta < 0.75 && v.reported >= 0.75);
        assert!((v.gain - (v.theta - 0.70)).abs() < 1e-12);
        assert!(r.kinds.contains(&ViolationKind::TransferFormula));
    }

    #[test]
    fn participation_examples() {
        let r = check_individual_rationality(&uniform_baseline_mech(), 1000);
        assert!(r.passes);
        let star = r.theta_star.unwrap();
        assert!(star > 0.25 && star < 0.75);
        assert!(r.min_utility.unwrap().abs() < 1e-12);

        let mut charged = uniform_baseline_mech();
        charged.transfers[1] = 0.01;
        let r = check_individual_rationality(&charged, 1000);
        assert!(!r.passes);
        assert_eq!(
            r.first_violation.unwrap().kind,
            ViolationKind::Participation
        );
        assert!((r.first_violation.unwrap().gain - 0.01).abs() < 1e-15);

        let sellers = MechanismRule::new(vec![0.0], vec![-1], vec![-1.0]).unwrap();
        let r = check_individual_rationality(&sellers, 1000);
        assert!(r.passes);
        assert_eq!(r.theta_star, Some(1.0));
    }
}
