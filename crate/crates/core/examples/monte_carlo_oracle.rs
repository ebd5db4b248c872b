// An agent-level simulation of the coexistence equilibrium, checked against
// the closed forms with per-estimate z-scores.
//
// ```bash
// cargo run --release --example monte_carlo_oracle
// ```

use agora::simulator::{
    compare_to_analytic, run_simulation, AnalyticModel, SimulationConfig, SimulationMode,
};
use agora::{DistributionSpec, ValuationDistribution};

fn main() -> agora::Result<()> {
    let spec = DistributionSpec::new("uniform", &[]);
    let dist = ValuationDistribution::from_spec(&spec)?;
    let model = AnalyticModel::new(&dist, SimulationMode::CoexistenceNash, 1.0)?;

    let mut config = SimulationConfig::new(spec, SimulationMode::CoexistenceNash, 1.0);
    config.n_agents = 50_000;
    config.n_replications = 8;
    config.n_bins = 20;
    config.seed = 42;
    let report = run_simulation(&config, model.equilibrium.as_ref())?;

    for (name, est, target) in [
        ("profit", report.empirical_profit, model.profit),
        (
            "compensations",
            report.empirical_compensations,
            model.compensations,
        ),
        ("welfare", report.empirical_welfare, model.welfare),
    ] {
        let z = est
            .z_score(target)
            .map_or("degenerate".into(), |z| format!("{z:+.2}"));
        println!(
            "{name:<14} {:.6} ± {:.1e}  analytic {:.6}  z {z}",
            est.mean, est.std_error, target
        );
    }
    let bins = compare_to_analytic(&report, |t| model.payoff(t));
    println!(
        "payoff bins: max |z| {:.2} over {} bins",
        bins.max_abs_z,
        bins.bins.len()
    );
    println!(
        "trades per replication: {:.0} on the marketplace, {:.0} in search",
        report.trades_marketplace, report.trades_decentralized
    );
    Ok(())
}
