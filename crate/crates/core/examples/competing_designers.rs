// Several marketplaces posting bid-ask prices: undercutting erodes the
// spread down to the market-clearing price, while a cartel splits the
// monopoly profit.
//
// ```bash
// cargo run --example competing_designers
// ```

use agora::competition::{cartel_split, undercut_gain, walrasian_price};
use agora::mechanism::solve_baseline;
use agora::ValuationDistribution;

fn main() -> agora::Result<()> {
    let d = ValuationDistribution::uniform();
    let monopoly = solve_baseline(&d, 1e-12)?;
    println!(
        "monopoly prices ({:.3}, {:.3}), profit {:.4}",
        monopoly.sell_price, monopoly.buy_price, monopoly.profit
    );
    for n in [2, 3, 5] {
        let gain = undercut_gain(&d, monopoly.sell_price, monopoly.buy_price, 0.01, n)?;
        println!(
            "  {n} designers: cartel share {:.5}, undercutting by 0.01 gains {:+.5}",
            cartel_split(&d, n)?,
            gain
        );
    }
    println!(
        "competition ends at the walrasian price {}",
        walrasian_price(&d)
    );
    Ok(())
}
