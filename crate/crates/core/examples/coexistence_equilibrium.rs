// A marketplace facing a frictional search market with Nash bargaining.
// The cutoffs do not move with the matching probability `p`; profit falls
// to `(1 − p/2)` of the baseline because cutoff types must be compensated.
//
// ```bash
// cargo run --example coexistence_equilibrium
// ```

use agora::coexistence::{solve_coexistence, verify_no_profitable_deviation};
use agora::ValuationDistribution;

fn main() -> agora::Result<()> {
    let d = ValuationDistribution::beta(2.0, 2.0)?;
    println!("{d}");
    println!(
        "{:>4} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7}",
        "p", "theta_lo", "theta_hi", "p_s", "p_b", "profit", "ratio"
    );
    for k in 0..=4 {
        let p = k as f64 / 4.0;
        let eq = solve_coexistence(&d, p, 1e-12)?;
        println!(
            "{p:>4.2} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.6} {:>7.4}",
            eq.theta_low, eq.theta_high, eq.sell_price, eq.buy_price, eq.profit, eq.ratio
        );
    }

    // No type gains by switching market.
    let eq = solve_coexistence(&d, 1.0, 1e-12)?;
    let dev = verify_no_profitable_deviation(&d, &eq, 1.0, 1001)?;
    println!(
        "\np = 1: deviation check {} (crossings {:?})",
        if dev.passes { "passes" } else { "FAILS" },
        dev.crossings
            .iter()
            .map(|c| format!("{c:.6}"))
            .collect::<Vec<_>>()
    );
    for theta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!(
            "  type {theta:.1}: equilibrium utility {:.5}",
            eq.nash_payoff(&d, theta)?
        );
    }
    Ok(())
}
