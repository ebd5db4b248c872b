// The search market under a midpoint double auction instead of Nash
// bargaining: equilibrium bids, payoffs, and the marketplace's profit.
//
// The computed profit is `(1 − 2p/3)` of the baseline; the printed closed
// form `1 − 5p/6` is shown alongside for comparison.
//
// ```bash
// cargo run --example double_auction
// ```

use agora::double_auction::{
    compare_printed_ratio, da_bid, da_payoff, solve_da_coexistence, DoubleAuctionSpec,
};
use agora::ValuationDistribution;

fn main() -> agora::Result<()> {
    let u = ValuationDistribution::uniform();
    let spec = DoubleAuctionSpec::new(&u, 0.25, 0.75, 1.0)?;
    println!("uniform, searching types [0.25, 0.75], p = 1");
    for theta in [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9] {
        println!(
            "  theta {theta:.2}: bid {:.5}, payoff {:.5}",
            da_bid(&spec, theta),
            da_payoff(&u, 0.25, 0.75, 1.0, theta)?
        );
    }

    println!(
        "\n{:>4} {:>10} {:>10} {:>10}",
        "p", "profit", "ratio", "1-5p/6"
    );
    for k in 1..=4 {
        let p = k as f64 / 4.0;
        let eq = solve_da_coexistence(&u, p, 1e-12)?;
        let cmp = compare_printed_ratio(&eq);
        println!(
            "{p:>4.2} {:>10.6} {:>10.6} {:>10.6}",
            eq.profit, cmp.computed_ratio, cmp.printed_ratio
        );
    }
    Ok(())
}
