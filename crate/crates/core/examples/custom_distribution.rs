// Bringing your own valuation distribution: a tabulated CDF from CSV, a
// piecewise density, and the regularity check that gates the solvers.
//
// ```bash
// cargo run --example custom_distribution
// ```

use agora::coexistence::solve_coexistence;
use agora::distributions::TabulatedCdf;
use agora::{AgoraError, ValuationDistribution};

fn main() -> agora::Result<()> {
    // CDF of Beta(2,2) sampled on 41 points.
    let xs: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| x * x * (3.0 - 2.0 * x)).collect();
    let tabulated = ValuationDistribution::table(TabulatedCdf::new(xs, ys)?);
    let exact = ValuationDistribution::beta(2.0, 2.0)?;
    let (a, b) = (
        solve_coexistence(&tabulated, 1.0, 1e-12)?,
        solve_coexistence(&exact, 1.0, 1e-12)?,
    );
    println!(
        "tabulated: cutoffs ({:.5}, {:.5}), profit {:.6}",
        a.theta_low, a.theta_high, a.profit
    );
    println!(
        "exact:     cutoffs ({:.5}, {:.5}), profit {:.6}",
        b.theta_low, b.theta_high, b.profit
    );

    // Mass piled at both ends breaks monotonicity of the virtual value.
    let bimodal = ValuationDistribution::piecewise(&[0.25, 0.75], &[1.9, 0.1, 1.9])?;
    let report = bimodal.check_regularity(1000);
    println!(
        "\n{bimodal}: regular = {}, {} violation points",
        report.is_regular,
        report.violation_points.len()
    );
    match solve_coexistence(&bimodal, 1.0, 1e-12) {
        Err(AgoraError::NotRegular { count, first }) => {
            println!("solver refuses it: {count} violations, first at {first:.4}")
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
