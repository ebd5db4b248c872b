// The profit-maximizing marketplace with no search market: cutoffs, the
// bid-ask prices that implement them, and the virtual-surplus identity.
//
// ```bash
// cargo run --example baseline_marketplace
// ```

use agora::mechanism::{solve_baseline, virtual_surplus};
use agora::ValuationDistribution;

fn main() -> agora::Result<()> {
    let families = [
        ValuationDistribution::uniform(),
        ValuationDistribution::power(2.0)?,
        ValuationDistribution::beta(2.0, 2.0)?,
        ValuationDistribution::trunc_exp(1.0)?,
        ValuationDistribution::trunc_normal(0.5, 0.2)?,
    ];
    println!(
        "{:<28} {:>10} {:>10} {:>10}",
        "distribution", "theta_low", "theta_high", "profit"
    );
    for d in &families {
        let s = solve_baseline(d, 1e-12)?;
        println!(
            "{:<28} {:>10.6} {:>10.6} {:>10.6}",
            d.to_string(),
            s.theta_low,
            s.theta_high,
            s.profit
        );
        // Profit equals the expected virtual surplus of the traded types.
        let vs = virtual_surplus(d, s.theta_low, s.theta_high)?;
        assert!((vs - s.profit).abs() < 1e-8);
    }

    let u = solve_baseline(&ValuationDistribution::uniform(), 1e-12)?;
    let mech = u.mechanism();
    println!(
        "\nuniform bid-ask: sellers below {:.4} get {:.4}, buyers above {:.4} pay {:.4}",
        u.theta_low, u.sell_price, u.theta_high, u.buy_price
    );
    for theta in [0.1, 0.25, 0.5, 0.75, 0.9] {
        println!(
            "  type {theta:.2}: allocation {:+}, utility {:.4}",
            mech.allocation(theta),
            mech.payoff(theta)
        );
    }
    Ok(())
}
