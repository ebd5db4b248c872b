//! Command-line front end. The `agora` binary forwards its arguments to [`run`].
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 non-regular distribution,
//! 3 a `check` failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::coexistence::{obedience_scan, solve_coexistence, two_interval_scan, EquilibriumReport};
use crate::distributions::{DistributionSpec, ValuationDistribution, REGULARITY_GRID};
use crate::double_auction::{printed_ratio, solve_da_coexistence};
use crate::error::{AgoraError, Result};
use crate::simulator::{
    compare_to_analytic, run_simulation, AnalyticModel, Estimate, Matching, Sampling,
    SimulationConfig, SimulationMode,
};
use crate::welfare::{check_assumption2, welfare_coexistence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_REGULAR: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

const SOLVE_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "agora",
    version,
    about = "Marketplace and search-market equilibrium solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Nash,
    Da,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    CoexistenceNash,
    CoexistenceDa,
    SearchOnly,
    MarketplaceOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MatchingArg {
    WithReplacement,
    Pairwise,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the equilibrium and write it as JSON.
    Solve {
        /// Distribution: a family name, inline JSON, or @file.
        #[arg(long)]
        dist: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "nash")]
        protocol: ProtocolArg,
        /// Solve the marketplace without a search market.
        #[arg(long)]
        baseline: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the equilibrium over a grid of matching probabilities.
    Sweep {
        #[arg(long)]
        dist: String,
        /// Comma-separated values or `start:step:end`.
        #[arg(long, default_value = "0:0.1:1")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the structural checks and print a pass/fail table.
    Check {
        #[arg(long)]
        dist: String,
    },
    /// Monte Carlo market; writes the report JSON and a bins CSV.
    Simulate {
        #[arg(long)]
        dist: String,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Search protocol when `--mode` is not given.
        #[arg(long, value_enum, default_value = "nash")]
        protocol: ProtocolArg,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, value_enum, default_value = "with-replacement")]
        matching: MatchingArg,
        /// Draw valuations independently instead of by stratified sampling.
        #[arg(long)]
        iid: bool,
        /// Report JSON; the bins CSV goes next to it as `<stem>.bins.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        bins_out: Option<PathBuf>,
    },
}

/// Parse `args` (including the program name), run the command, and return
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve {
            dist,
            p,
            protocol,
            baseline,
            out,
        } => cmd_solve(&dist, p, protocol, baseline, out.as_deref(), stdout, stderr),
        Command::Sweep { dist, grid, out } => {
            cmd_sweep(&dist, &grid, out.as_deref(), stdout, stderr)
        }
        Command::Check { dist } => cmd_check(&dist, stdout),
        Command::Simulate {
            dist,
            mode,
            protocol,
            p,
            n,
            reps,
            seed,
            bins,
            matching,
            iid,
            out,
            bins_out,
        } => {
            let mode = match (mode, protocol) {
                (Some(ModeArg::CoexistenceNash), _) | (None, ProtocolArg::Nash) => {
                    SimulationMode::CoexistenceNash
                }
                (Some(ModeArg::CoexistenceDa), _) | (None, ProtocolArg::Da) => {
                    SimulationMode::CoexistenceDa
                }
                (Some(ModeArg::SearchOnly), _) => SimulationMode::SearchOnly,
                (Some(ModeArg::MarketplaceOnly), _) => SimulationMode::MarketplaceOnly,
            };
            DistributionSpec::parse(&dist).and_then(|spec| {
                let config = SimulationConfig {
                    dist: spec,
                    mode,
                    p,
                    n_agents: n,
                    n_replications: reps,
                    seed,
                    n_bins: bins,
                    matching: match matching {
                        MatchingArg::WithReplacement => Matching::WithReplacement,
                        MatchingArg::Pairwise => Matching::Pairwise,
                    },
                    sampling: if iid {
                        Sampling::Iid
                    } else {
                        Sampling::Stratified
                    },
                };
                cmd_simulate(&config, out.as_deref(), bins_out.as_deref(), stdout)
            })
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                AgoraError::NotRegular { .. } => EXIT_NOT_REGULAR,
                _ => EXIT_USAGE,
            }
        }
    }
}

/// Round to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => {
                serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
            }
            _ => Value::Number(n),
        },
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_value).collect()),
        Value::Object(m) => {
            Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = round_value(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Build the distribution and refuse non-regular ones with a diagnostic.
fn regular_distribution(text: &str, stderr: &mut dyn Write) -> Result<ValuationDistribution> {
    let dist = DistributionSpec::parse(text)?.build()?;
    let report = dist.check_regularity(REGULARITY_GRID);
    if !report.is_regular {
        let shown: Vec<String> = report
            .violation_points
            .iter()
            .take(10)
            .map(|(t, which)| format!("{t:.6} ({which:?})"))
            .collect();
        writeln!(stderr, "regularity violations at: {}", shown.join(", "))?;
        return Err(AgoraError::NotRegular {
            count: report.violation_points.len(),
            first: report.violation_points[0].0,
        });
    }
    Ok(dist)
}

fn solve(
    dist: &ValuationDistribution,
    p: f64,
    protocol: ProtocolArg,
    baseline: bool,
) -> Result<EquilibriumReport> {
    if baseline {
        return solve_coexistence(dist, 0.0, SOLVE_TOL);
    }
    match protocol {
        ProtocolArg::Nash => solve_coexistence(dist, p, SOLVE_TOL),
        ProtocolArg::Da => solve_da_coexistence(dist, p, SOLVE_TOL),
    }
}

fn cmd_solve(
    dist: &str,
    p: f64,
    protocol: ProtocolArg,
    baseline: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let dist = regular_distribution(dist, stderr)?;
    let report = solve(&dist, p, protocol, baseline)?;
    emit(&to_json(&report)?, out, stdout)?;
    Ok(EXIT_OK)
}

/// Parse `a,b,c` or `start:step:end`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || AgoraError::InvalidArgument(format!("cannot parse grid `{text}`"));
    let text = text.trim();
    if text.is_empty() {
        return Err(AgoraError::InvalidArgument("empty p grid".into()));
    }
    let parts: Vec<&str> = text.split(':').collect();
    let grid = if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (start, step, end) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || end < start {
            return Err(bad());
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| round_sig(start + step * i as f64))
            .collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() {
        return Err(AgoraError::InvalidArgument("empty p grid".into()));
    }
    Ok(grid)
}

fn cmd_sweep(
    dist: &str,
    grid: &str,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let grid = parse_grid(grid)?;
    let dist = regular_distribution(dist, stderr)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "p",
        "theta_low",
        "theta_high",
        "p_s",
        "p_b",
        "profit",
        "compensations",
        "ratio",
        "welfare_total",
        "welfare_search_only",
        "welfare_marketplace_only",
    ])?;
    for &p in &grid {
        let eq = solve_coexistence(&dist, p, SOLVE_TOL)?;
        let wf = welfare_coexistence(&dist, eq.theta_low, eq.theta_high, p)?;
        let row = [
            p,
            eq.theta_low,
            eq.theta_high,
            eq.sell_price,
            eq.buy_price,
            eq.profit,
            eq.compensations,
            eq.ratio,
            wf.total,
            wf.search_only,
            wf.marketplace_only,
        ];
        w.write_record(row.iter().map(|&x| round_sig(x).to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| AgoraError::Io(e.into_error()))?;
    emit(&String::from_utf8_lossy(&bytes), out, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_check(dist: &str, stdout: &mut dyn Write) -> Result<i32> {
    let dist = DistributionSpec::parse(dist)?.build()?;
    let mut rows: Vec<(&str, bool, String)> = Vec::new();
    let reg = dist.check_regularity(REGULARITY_GRID);
    rows.push((
        "regularity",
        reg.is_regular,
        format!(
            "{} violation points on a {}-point grid",
            reg.violation_points.len(),
            reg.grid_size
        ),
    ));
    if reg.is_regular {
        let eq = solve_coexistence(&dist, 1.0, SOLVE_TOL)?;
        let (lo, hi) = (eq.theta_low, eq.theta_high);
        let a2 = check_assumption2(&dist, lo, hi)?;
        rows.push((
            "assumption2",
            a2.satisfied,
            format!("margin {}", round_sig(a2.margin)),
        ));
        let p_grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let ob = obedience_scan(&dist, lo, hi, 40, &p_grid)?;
        rows.push((
            "obedience",
            ob.min_residual > 1e-3,
            format!(
                "min max(|r1|,|r2|) {} over {} points",
                round_sig(ob.min_residual),
                ob.evaluated
            ),
        ));
        let dom = two_interval_scan(&dist, lo, hi, 1.0, 2500)?;
        rows.push((
            "two_interval",
            dom.interval_is_best,
            format!(
                "best a {} (interval profit {}, best {})",
                round_sig(dom.best_a),
                round_sig(dom.interval_profit),
                round_sig(dom.best_profit)
            ),
        ));
    } else {
        for name in ["assumption2", "obedience", "two_interval"] {
            rows.push((name, false, "skipped: distribution is not regular".into()));
        }
    }
    writeln!(stdout, "{:<14} {:<6} detail", "check", "result")?;
    for (name, ok, detail) in &rows {
        writeln!(
            stdout,
            "{:<14} {:<6} {}",
            name,
            if *ok { "pass" } else { "FAIL" },
            detail
        )?;
    }
    Ok(if rows.iter().all(|r| r.1) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn z_line(stdout: &mut dyn Write, label: &str, est: &Estimate, target: f64) -> Result<()> {
    let z = est
        .z_score(target)
        .map_or_else(|| "degenerate".to_string(), |z| format!("{:.3}", z));
    writeln!(
        stdout,
        "{label:<24} empirical {} ± {}  analytic {}  z {}",
        round_sig(est.mean),
        round_sig(est.std_error),
        round_sig(target),
        z
    )?;
    Ok(())
}

fn cmd_simulate(
    config: &SimulationConfig,
    out: Option<&Path>,
    bins_out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let dist = config.dist.build()?;
    let report = run_simulation(config, None)?;
    let model = AnalyticModel::new(&dist, config.mode, config.p)?;

    let json = to_json(&report)?;
    match out {
        Some(path) => {
            std::fs::write(path, &json)?;
            let csv_path = bins_out
                .map(Path::to_path_buf)
                .unwrap_or_else(|| path.with_extension("bins.csv"));
            report.save_bins_csv(&csv_path)?;
        }
        None => {
            if let Some(path) = bins_out {
                report.save_bins_csv(path)?;
            }
        }
    }

    z_line(stdout, "profit", &report.empirical_profit, model.profit)?;
    z_line(
        stdout,
        "compensations",
        &report.empirical_compensations,
        model.compensations,
    )?;
    z_line(stdout, "welfare", &report.empirical_welfare, model.welfare)?;
    z_line(
        stdout,
        "welfare (marketplace)",
        &report.welfare_marketplace,
        model.welfare_marketplace,
    )?;
    z_line(
        stdout,
        "welfare (search)",
        &report.welfare_decentralized,
        model.welfare_decentralized,
    )?;
    if config.mode == SimulationMode::CoexistenceDa {
        if let Some(eq) = &model.equilibrium {
            // Profit implied by the simulated compensations, against both
            // candidate closed forms.
            let implied = Estimate {
                mean: eq.virtual_surplus - report.empirical_compensations.mean,
                std_error: report.empirical_compensations.std_error,
            };
            z_line(stdout, "implied profit", &implied, eq.profit)?;
            z_line(
                stdout,
                "implied vs 1-5p/6",
                &implied,
                printed_ratio(config.p) * eq.baseline_profit,
            )?;
        }
    }
    let cmp = compare_to_analytic(&report, |t| model.payoff(t));
    writeln!(
        stdout,
        "trades: marketplace {} per replication, search {} per replication",
        round_sig(report.trades_marketplace),
        round_sig(report.trades_decentralized)
    )?;
    writeln!(
        stdout,
        "payoff bins: max |z| = {:.3} over {} bins ({} degenerate)",
        cmp.max_abs_z,
        cmp.bins.len(),
        cmp.degenerate_bins
    )?;
    if out.is_none() {
        stdout.write_all(json.as_bytes())?;
    }
    Ok(EXIT_OK)
}
