//! Cross-module invariants over randomly drawn regular distributions.

use agora::coexistence::{coexistence_profit_general, posted_prices, solve_coexistence};
use agora::mechanism::{check_incentive_compatibility, solve_baseline, virtual_surplus};
use agora::numeric::interior_grid;
use agora::search::search_payoff;
use agora::ValuationDistribution;
use proptest::prelude::*;

fn regular_family() -> impl Strategy<Value = ValuationDistribution> {
    prop_oneof![
        (1.0f64..4.0).prop_map(|k| ValuationDistribution::power(k).unwrap()),
        (1.0f64..5.0, 1.0f64..5.0).prop_map(|(a, b)| ValuationDistribution::beta(a, b).unwrap()),
        (0.2f64..3.0).prop_map(|r| ValuationDistribution::trunc_exp(r).unwrap()),
        (0.3f64..0.7, 0.15f64..0.5)
            .prop_map(|(m, s)| ValuationDistribution::trunc_normal(m, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profit_ratio_is_distribution_free(d in regular_family(), p in 0.0f64..=1.0) {
        prop_assume!(d.check_regularity(200).is_regular);
        let eq = solve_coexistence(&d, p, 1e-12).unwrap();
        prop_assert!((eq.ratio - (1.0 - p / 2.0)).abs() < 1e-6, "{d}: ratio {}", eq.ratio);
        prop_assert!((eq.profit + eq.compensations - eq.virtual_surplus).abs() < 1e-9);
    }

    #[test]
    fn baseline_is_a_local_maximum(d in regular_family()) {
        prop_assume!(d.check_regularity(200).is_regular);
        let b = solve_baseline(&d, 1e-12).unwrap();
        let objective = |lo: f64| d.cdf(lo) * (d.quantile(1.0 - d.cdf(lo)) - lo);
        prop_assert!((virtual_surplus(&d, b.theta_low, b.theta_high).unwrap() - b.profit).abs() < 1e-8);
        for step in [-1e-3, 1e-3] {
            prop_assert!(objective(b.theta_low + step) < b.profit);
        }
    }

    #[test]
    fn cutoff_types_are_indifferent(d in regular_family(), p in 0.05f64..=1.0) {
        prop_assume!(d.check_regularity(200).is_regular);
        let eq = solve_coexistence(&d, p, 1e-12).unwrap();
        let (ps, pb) = posted_prices(&d, eq.theta_low, eq.theta_high, p).unwrap();
        let ud_low = search_payoff(&d, eq.theta_low, eq.theta_high, p, eq.theta_low).unwrap();
        let ud_high = search_payoff(&d, eq.theta_low, eq.theta_high, p, eq.theta_high).unwrap();
        prop_assert!((ps - eq.theta_low - ud_low).abs() < 1e-10);
        prop_assert!((eq.theta_high - pb - ud_high).abs() < 1e-10);
    }

    #[test]
    fn compensations_are_half_p_of_virtual_surplus(lo in 0.05f64..0.45, p in 0.0f64..=1.0) {
        // Any balanced pair of cutoffs, not only the optimum.
        let d = ValuationDistribution::uniform();
        let b = coexistence_profit_general(&d, lo, 1.0 - lo, p).unwrap();
        prop_assert!((b.compensations - 0.5 * p * b.virtual_surplus).abs() < 1e-12);
    }

    #[test]
    fn incentive_compatible_payoffs_are_convex(d in regular_family()) {
        prop_assume!(d.check_regularity(200).is_regular);
        let m = solve_baseline(&d, 1e-12).unwrap().mechanism();
        prop_assert!(check_incentive_compatibility(&m, 400).passes);
        let grid = interior_grid(0.0, 1.0, 300);
        for w in grid.windows(3) {
            let (a, b, c) = (m.payoff(w[0]), m.payoff(w[1]), m.payoff(w[2]));
            prop_assert!(a + c - 2.0 * b >= -1e-12);
        }
    }
}
