// Expected payoffs in the search market alone, for an interval of searching
// types and for a two-interval segmentation.
//
// ```bash
// cargo run --example search_payoffs
// ```

use agora::search::{search_payoff, search_payoff_general, search_payoff_slope, SegmentationSpec};
use agora::ValuationDistribution;

fn main() -> agora::Result<()> {
    let u = ValuationDistribution::uniform();
    let (lo, hi, p) = (0.25, 0.75, 1.0);
    println!("types in [{lo}, {hi}] search, meeting probability {p}");
    for k in 0..=10 {
        let theta = k as f64 / 10.0;
        println!(
            "  theta {theta:.1}: payoff {:.5}, slope {:+.4}",
            search_payoff(&u, lo, hi, p, theta)?,
            search_payoff_slope(&u, lo, hi, p, theta)?
        );
    }

    // Types near the median trade on both sides and earn the least.
    let split = SegmentationSpec::new(vec![(0.25, 0.4), (0.6, 0.75)], p)?;
    println!("\ntwo intervals {:?}:", split.segments);
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!(
            "  theta {theta:.2}: payoff {:.5}",
            search_payoff_general(&u, &split, theta)?
        );
    }
    Ok(())
}
