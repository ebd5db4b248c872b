// Gains from trade with a search market only, a marketplace only, and both.
//
// ```bash
// cargo run --example welfare
// ```

use agora::coexistence::solve_coexistence;
use agora::numeric::interior_grid;
use agora::welfare::{check_assumption2, payoff_monotonicity_sweep, welfare_coexistence};
use agora::ValuationDistribution;

fn main() -> agora::Result<()> {
    for d in [
        ValuationDistribution::uniform(),
        ValuationDistribution::trunc_logistic(0.5, 0.1)?,
    ] {
        let eq = solve_coexistence(&d, 1.0, 1e-12)?;
        let w = welfare_coexistence(&d, eq.theta_low, eq.theta_high, 1.0)?;
        let a2 = check_assumption2(&d, eq.theta_low, eq.theta_high)?;
        println!("{d}");
        println!("  search only       {:.6}", w.search_only);
        println!("  marketplace only  {:.6}", w.marketplace_only);
        println!(
            "  coexistence       {:.6} ({:.6} marketplace + {:.6} search)",
            w.total, w.marketplace_part, w.decentralized_part
        );
        println!(
            "  sufficient condition for coexistence > search: {} (margin {:.4})",
            a2.satisfied, a2.margin
        );
    }

    // Lower search friction never hurts any type.
    let u = ValuationDistribution::uniform();
    let sweep = payoff_monotonicity_sweep(
        &u,
        &[0.0, 0.25, 0.5, 0.75, 1.0],
        &interior_grid(0.0, 1.0, 200),
    )?;
    println!(
        "\nutility weakly increasing in p for every type: {} ({} comparisons)",
        sweep.passes, sweep.checked
    );
    Ok(())
}
