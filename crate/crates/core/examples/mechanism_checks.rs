// Incentive and participation checks on posted-price mechanisms, including
// three deliberately broken ones.
//
// ```bash
// cargo run --example mechanism_checks
// ```

use agora::mechanism::{
    check_incentive_compatibility, check_individual_rationality, MechanismRule,
};

fn show(name: &str, m: &MechanismRule) {
    let ic = check_incentive_compatibility(m, 1001);
    let ir = check_individual_rationality(m, 1001);
    println!("{name}");
    println!("  incentive compatible: {} {:?}", ic.passes, ic.kinds);
    println!("  individually rational: {} {:?}", ir.passes, ir.kinds);
    if let Some(v) = ic.first_violation.or(ir.first_violation) {
        println!(
            "  first violation: type {:.3} reporting {:.3} gains {:.4}",
            v.theta, v.reported, v.gain
        );
    }
}

fn main() -> agora::Result<()> {
    let good = MechanismRule::bid_ask(0.25, 0.75)?;
    show("bid-ask (0.25, 0.75)", &good);

    let non_monotone =
        MechanismRule::new(vec![0.0, 0.3, 0.6], vec![-1, 1, 0], vec![-0.3, 0.3, 0.0])?;
    show("sell, buy, then no trade", &non_monotone);

    let mut cheap = good.clone();
    cheap.transfers[2] = 0.70;
    show("buy price lowered to 0.70", &cheap);

    let mut charged = good.clone();
    charged.transfers[1] = 0.01;
    show("excluded types charged 0.01", &charged);

    println!(
        "\nJSON: {}",
        serde_json::to_string(&good).expect("mechanism serializes")
    );
    Ok(())
}
