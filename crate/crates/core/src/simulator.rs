//! Seeded Monte Carlo market used as an oracle for the closed forms.
//!
//! Each replication draws a finite population, sends the extremes to the
//! marketplace and the rest to a search market, executes trades, and
//! records realized profit, welfare and per-type payoffs. Replications use
//! independent ChaCha streams keyed by `(seed, replication)` and are
//! aggregated in replication order, so results do not depend on the number
//! of worker threads.
//!
//! Valuations are drawn by stratified inverse-CDF sampling by default: one
//! point per quantile stratum `[i/n, (i+1)/n)` with a common offset, mirrored
//! so that the sample is symmetric in probability space. Marketplace sellers
//! and buyers then have equal counts whenever the cutoffs balance, and the
//! short side is not rationed. Independent draws are available through
//! [`Sampling::Iid`]; there the rationing of the short side biases profit
//! down by a term of order `1/√n`.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coexistence::{solve_coexistence, EquilibriumReport};
use crate::distributions::{DistributionSpec, ValuationDistribution};
use crate::double_auction::{da_payoff_with, solve_da_coexistence, BidTable, DoubleAuctionSpec};
use crate::error::{AgoraError, Result};
use crate::mechanism::solve_baseline;
use crate::search::search_payoff;
use crate::welfare::{welfare_coexistence, welfare_marketplace, welfare_search_only};

/// Largest |z| a comparison may show and still pass.
pub const Z_LIMIT: f64 = 4.0;

/// Discrepancy allowed against a target when the standard error is zero.
pub const EXACT_TOL: f64 = 1e-12;

const SOLVER_TOL: f64 = 1e-12;
const BID_TABLE_POINTS: usize = 4097;
const QUANTILE_TABLE_POINTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    CoexistenceNash,
    CoexistenceDa,
    SearchOnly,
    MarketplaceOnly,
}

impl std::str::FromStr for SimulationMode {
    type Err = AgoraError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coexistence-nash" => Ok(Self::CoexistenceNash),
            "coexistence-da" => Ok(Self::CoexistenceDa),
            "search-only" => Ok(Self::SearchOnly),
            "marketplace-only" => Ok(Self::MarketplaceOnly),
            other => Err(AgoraError::Config(format!(
                "unknown simulation mode `{other}`"
            ))),
        }
    }
}

/// How matched partners are drawn in the search market.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Matching {
    /// Each searcher meets, with probability `p`, a partner drawn with
    /// replacement from the searching pool. Drawing oneself is a tie.
    #[default]
    WithReplacement,
    /// The pool is shuffled into disjoint pairs; each pair meets with
    /// probability `p`.
    Pairwise,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    Stratified,
    Iid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dist: DistributionSpec,
    pub mode: SimulationMode,
    pub p: f64,
    pub n_agents: usize,
    pub n_replications: usize,
    pub seed: u64,
    pub n_bins: usize,
    #[serde(default)]
    pub matching: Matching,
    #[serde(default)]
    pub sampling: Sampling,
}

impl SimulationConfig {
    pub fn new(dist: DistributionSpec, mode: SimulationMode, p: f64) -> Self {
        Self {
            dist,
            mode,
            p,
            n_agents: 200_000,
            n_replications: 20,
            seed: 1,
            n_bins: 50,
            matching: Matching::default(),
            sampling: Sampling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1000 {
            return Err(AgoraError::Config(format!(
                "n_agents must be at least 1000, got {}",
                self.n_agents
            )));
        }
        if self.n_bins < 10 {
            return Err(AgoraError::Config(format!(
                "n_bins must be at least 10, got {}",
                self.n_bins
            )));
        }
        if self.n_replications == 0 {
            return Err(AgoraError::Config("n_replications must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(AgoraError::Config(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        Ok(())
    }
}

/// Mean across replications and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std_error = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error }
    }

    /// z-score against `target`. Agreement within [`EXACT_TOL`] scores 0 even
    /// when the standard error is only rounding noise; `None` marks a zero
    /// standard error with a larger discrepancy.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        let diff = self.mean - target;
        if diff.abs() <= EXACT_TOL {
            Some(0.0)
        } else if self.std_error > 0.0 {
            Some(diff / self.std_error)
        } else {
            None
        }
    }

    pub fn within(&self, target: f64, z_limit: f64) -> bool {
        self.z_score(target).is_some_and(|z| z.abs() <= z_limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinPayoff {
    /// Mean valuation of the agents in the bin.
    pub bin_mid: f64,
    pub mean: f64,
    pub std_error: f64,
    /// Agents in the bin, summed over replications.
    pub count: u64,
}

/// Cutoffs and prices the simulated marketplace used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketStructure {
    pub theta_low: f64,
    pub theta_high: f64,
    pub sell_price: f64,
    pub buy_price: f64,
    pub has_marketplace: bool,
    pub has_search: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub market: MarketStructure,
    pub empirical_profit: Estimate,
    /// Search payoffs of the cutoff types, probed once per marketplace agent.
    pub empirical_compensations: Estimate,
    pub empirical_welfare: Estimate,
    pub welfare_marketplace: Estimate,
    pub welfare_decentralized: Estimate,
    /// Marketplace trades per replication.
    pub trades_marketplace: f64,
    /// Searchers whose meeting ended in a trade, per replication.
    pub trades_decentralized: f64,
    pub bin_payoffs: Vec<BinPayoff>,
}

impl SimulationReport {
    pub fn write_bins_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_mid", "mean", "stderr", "count"])?;
        for b in &self.bin_payoffs {
            w.write_record([
                format!("{:.12e}", b.bin_mid),
                format!("{:.12e}", b.mean),
                format!("{:.12e}", b.std_error),
                b.count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_bins_csv(&self, path: &Path) -> Result<()> {
        self.write_bins_csv(std::fs::File::create(path)?)
    }
}

/// Closed-form counterparts of every simulated quantity.
pub struct AnalyticModel {
    pub mode: SimulationMode,
    pub market: MarketStructure,
    pub equilibrium: Option<EquilibriumReport>,
    pub profit: f64,
    pub compensations: f64,
    pub welfare: f64,
    pub welfare_marketplace: f64,
    pub welfare_decentralized: f64,
    dist: ValuationDistribution,
    p: f64,
    da: Option<DoubleAuctionSpec>,
}

impl AnalyticModel {
    pub fn new(dist: &ValuationDistribution, mode: SimulationMode, p: f64) -> Result<Self> {
        let eq = match mode {
            SimulationMode::CoexistenceNash => Some(solve_coexistence(dist, p, SOLVER_TOL)?),
            SimulationMode::CoexistenceDa => Some(solve_da_coexistence(dist, p, SOLVER_TOL)?),
            _ => None,
        };
        Self::with_equilibrium(dist, mode, p, eq)
    }

    fn with_equilibrium(
        dist: &ValuationDistribution,
        mode: SimulationMode,
        p: f64,
        eq: Option<EquilibriumReport>,
    ) -> Result<Self> {
        let mut model = Self {
            mode,
            market: MarketStructure {
                theta_low: 0.0,
                theta_high: 0.0,
                sell_price: 0.0,
                buy_price: 0.0,
                has_marketplace: false,
                has_search: true,
            },
            equilibrium: None,
            profit: 0.0,
            compensations: 0.0,
            welfare: 0.0,
            welfare_marketplace: 0.0,
            welfare_decentralized: 0.0,
            dist: dist.clone(),
            p,
            da: None,
        };
        match mode {
            SimulationMode::CoexistenceNash | SimulationMode::CoexistenceDa => {
                let eq = eq.ok_or_else(|| {
                    AgoraError::Config("coexistence mode needs an equilibrium".into())
                })?;
                model.market = MarketStructure {
                    theta_low: eq.theta_low,
                    theta_high: eq.theta_high,
                    sell_price: eq.sell_price,
                    buy_price: eq.buy_price,
                    has_marketplace: true,
                    has_search: true,
                };
                let w = welfare_coexistence(dist, eq.theta_low, eq.theta_high, p)?;
                model.profit = eq.profit;
                model.compensations = eq.compensations;
                model.welfare = w.total;
                model.welfare_marketplace = w.marketplace_part;
                model.welfare_decentralized = w.decentralized_part;
                if mode == SimulationMode::CoexistenceDa {
                    model.da = Some(DoubleAuctionSpec::new(
                        dist,
                        eq.theta_low,
                        eq.theta_high,
                        p,
                    )?);
                }
                model.equilibrium = Some(eq);
            }
            SimulationMode::SearchOnly => {
                let (lo, hi) = dist.support();
                model.market.theta_low = lo;
                model.market.theta_high = hi;
                model.welfare = welfare_search_only(dist, p)?;
                model.welfare_decentralized = model.welfare;
            }
            SimulationMode::MarketplaceOnly => {
                let base = solve_baseline(dist, SOLVER_TOL)?;
                model.market = MarketStructure {
                    theta_low: base.theta_low,
                    theta_high: base.theta_high,
                    sell_price: base.sell_price,
                    buy_price: base.buy_price,
                    has_marketplace: true,
                    has_search: false,
                };
                model.profit = base.profit;
                model.welfare = welfare_marketplace(dist, base.theta_low, base.theta_high);
                model.welfare_marketplace = model.welfare;
            }
        }
        Ok(model)
    }

    /// Equilibrium utility of type `theta`.
    pub fn payoff(&self, theta: f64) -> f64 {
        let m = &self.market;
        let um = if m.has_marketplace {
            (m.sell_price - theta).max(theta - m.buy_price).max(0.0)
        } else {
            0.0
        };
        if !m.has_search || self.p == 0.0 {
            return um;
        }
        let ud = match &self.da {
            Some(spec) => da_payoff_with(spec, theta),
            None => search_payoff(&self.dist, m.theta_low, m.theta_high, self.p, theta)
                .unwrap_or(f64::NAN),
        };
        um.max(ud)
    }
}

/// Per-replication totals.
struct Replication {
    profit: f64,
    compensations: f64,
    welfare_marketplace: f64,
    welfare_decentralized: f64,
    trades_marketplace: u64,
    trades_decentralized: u64,
    bin_theta: Vec<f64>,
    bin_payoff: Vec<f64>,
    bin_count: Vec<u64>,
}

enum Sampler {
    Exact(ValuationDistribution),
    Table(Vec<f64>),
}

impl Sampler {
    fn new(dist: &ValuationDistribution) -> Self {
        if dist.quantile_is_cheap() {
            Sampler::Exact(dist.clone())
        } else {
            let n = QUANTILE_TABLE_POINTS;
            Sampler::Table(
                (0..=n)
                    .map(|i| dist.quantile(i as f64 / n as f64))
                    .collect(),
            )
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        match self {
            Sampler::Exact(d) => d.quantile(u),
            Sampler::Table(t) => {
                let n = t.len() - 1;
                let x = u.clamp(0.0, 1.0) * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let w = x - i as f64;
                t[i] * (1.0 - w) + t[i + 1] * w
            }
        }
    }
}

/// Equal-probability bins laid out separately on each market segment so no
/// bin straddles a cutoff.
struct Bins {
    /// (start in probability space, width of one bin, first bin index, bins)
    segments: Vec<(f64, f64, usize, usize)>,
    total: usize,
}

impl Bins {
    fn new(masses: &[f64], n_bins: usize) -> Self {
        let total_mass: f64 = masses.iter().sum();
        let mut counts: Vec<usize> = masses
            .iter()
            .map(|m| ((n_bins as f64 * m / total_mass).round() as usize).max(1))
            .collect();
        let assigned: usize = counts.iter().sum();
        let largest = (0..counts.len())
            .max_by(|&a, &b| masses[a].total_cmp(&masses[b]))
            .unwrap();
        if assigned > n_bins {
            counts[largest] = counts[largest].saturating_sub(assigned - n_bins).max(1);
        } else {
            counts[largest] += n_bins - assigned;
        }
        let mut segments = Vec::new();
        let (mut start, mut first) = (0.0, 0);
        for (m, k) in masses.iter().zip(&counts) {
            segments.push((start, m / *k as f64, first, *k));
            start += m;
            first += k;
        }
        Self {
            segments,
            total: first,
        }
    }

    fn index(&self, segment: usize, u: f64) -> usize {
        let (start, width, first, k) = self.segments[segment];
        let j = if width > 0.0 {
            ((u - start) / width).floor()
        } else {
            0.0
        };
        first + (j.max(0.0) as usize).min(k - 1)
    }
}

/// Search-market outcome for an agent of value `v` and bid `bv` meeting a
/// partner `(w, bw)`: the agent's payoff and its half of the surplus.
#[inline]
fn meeting(da: bool, v: f64, bv: f64, w: f64, bw: f64) -> Option<(f64, f64)> {
    let (mine, theirs) = if da { (bv, bw) } else { (v, w) };
    if mine == theirs {
        return None;
    }
    let price = 0.5 * (mine + theirs);
    let half_surplus = 0.5 * (v - w).abs();
    Some(if mine > theirs {
        (v - price, half_surplus)
    } else {
        (price - v, half_surplus)
    })
}

fn run_replication(
    config: &SimulationConfig,
    sampler: &Sampler,
    market: &MarketStructure,
    bids: Option<&BidTable>,
    bins: &Bins,
    rep: usize,
) -> Replication {
    let n = config.n_agents;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(rep as u64);

    let mut us = vec![0.0; n];
    match config.sampling {
        Sampling::Stratified => {
            let offset: f64 = rng.random();
            for i in 0..n / 2 {
                let u = (i as f64 + offset) / n as f64;
                us[i] = u;
                us[n - 1 - i] = 1.0 - u;
            }
            if n % 2 == 1 {
                us[n / 2] = (n / 2) as f64 / n as f64 + offset / n as f64;
            }
        }
        Sampling::Iid => us.iter_mut().for_each(|u| *u = rng.random()),
    }
    let thetas: Vec<f64> = us.iter().map(|&u| sampler.quantile(u)).collect();

    // Segment of every agent: 0 sells, 1 searches (or idles), 2 buys.
    let segment: Vec<usize> = thetas
        .iter()
        .map(|&t| {
            if !market.has_marketplace {
                1
            } else if t <= market.theta_low {
                0
            } else if t >= market.theta_high {
                2
            } else {
                1
            }
        })
        .collect();
    let mut payoff = vec![0.0; n];
    let bid = |t: f64| bids.map_or(t, |b| b.bid(t));
    let is_da = bids.is_some();

    let pool: Vec<usize> = if market.has_search {
        (0..n).filter(|&i| segment[i] == 1).collect()
    } else {
        Vec::new()
    };
    let search_on = market.has_search && config.p > 0.0 && !pool.is_empty();

    // Marketplace.
    let mut profit = 0.0;
    let mut compensations = 0.0;
    let mut welfare_m = 0.0;
    let mut trades_m = 0u64;
    if market.has_marketplace {
        let mut sellers: Vec<usize> = (0..n).filter(|&i| segment[i] == 0).collect();
        let mut buyers: Vec<usize> = (0..n).filter(|&i| segment[i] == 2).collect();
        let executed = sellers.len().min(buyers.len());
        if sellers.len() > executed {
            sellers.partial_shuffle(&mut rng, executed);
            sellers.truncate(executed);
        }
        if buyers.len() > executed {
            buyers.partial_shuffle(&mut rng, executed);
            buyers.truncate(executed);
        }
        for &i in &sellers {
            payoff[i] = market.sell_price - thetas[i];
            welfare_m -= thetas[i];
        }
        for &i in &buyers {
            payoff[i] = thetas[i] - market.buy_price;
            welfare_m += thetas[i];
        }
        trades_m = executed as u64;
        profit = (market.buy_price - market.sell_price) * executed as f64;

        // What the cutoff types would earn by searching, once per
        // marketplace agent.
        if search_on {
            let (lo, hi) = (market.theta_low, market.theta_high);
            let (b_lo, b_hi) = (bid(lo), bid(hi));
            for &seg in segment.iter().take(n) {
                let (v, bv) = match seg {
                    0 => (lo, b_lo),
                    2 => (hi, b_hi),
                    _ => continue,
                };
                if rng.random::<f64>() < config.p {
                    let j = pool[rng.random_range(0..pool.len())];
                    if let Some((u, _)) = meeting(is_da, v, bv, thetas[j], bid(thetas[j])) {
                        compensations += u;
                    }
                }
            }
        }
    }

    // Search market.
    let mut welfare_d = 0.0;
    let mut trades_d = 0u64;
    if search_on {
        match config.matching {
            Matching::WithReplacement => {
                for (k, &i) in pool.iter().enumerate() {
                    if rng.random::<f64>() >= config.p {
                        continue;
                    }
                    let k2 = rng.random_range(0..pool.len());
                    if k2 == k {
                        continue;
                    }
                    let j = pool[k2];
                    if let Some((u, half)) =
                        meeting(is_da, thetas[i], bid(thetas[i]), thetas[j], bid(thetas[j]))
                    {
                        payoff[i] = u;
                        welfare_d += half;
                        trades_d += 1;
                    }
                }
            }
            Matching::Pairwise => {
                let mut order = pool.clone();
                order.shuffle(&mut rng);
                for pair in order.chunks_exact(2) {
                    if rng.random::<f64>() >= config.p {
                        continue;
                    }
                    let (i, j) = (pair[0], pair[1]);
                    let (bi, bj) = (bid(thetas[i]), bid(thetas[j]));
                    if let (Some((ui, half)), Some((uj, _))) = (
                        meeting(is_da, thetas[i], bi, thetas[j], bj),
                        meeting(is_da, thetas[j], bj, thetas[i], bi),
                    ) {
                        payoff[i] = ui;
                        payoff[j] = uj;
                        welfare_d += 2.0 * half;
                        trades_d += 2;
                    }
                }
            }
        }
    }

    let mut bin_theta = vec![0.0; bins.total];
    let mut bin_payoff = vec![0.0; bins.total];
    let mut bin_count = vec![0u64; bins.total];
    for i in 0..n {
        let b = bins.index(
            if bins.segments.len() == 1 {
                0
            } else {
                segment[i]
            },
            us[i],
        );
        bin_theta[b] += thetas[i];
        bin_payoff[b] += payoff[i];
        bin_count[b] += 1;
    }

    let nf = n as f64;
    Replication {
        profit: profit / nf,
        compensations: compensations / nf,
        welfare_marketplace: welfare_m / nf,
        welfare_decentralized: welfare_d / nf,
        trades_marketplace: trades_m,
        trades_decentralized: trades_d,
        bin_theta,
        bin_payoff,
        bin_count,
    }
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var("AGORA_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(Some)
            .ok_or_else(|| {
                AgoraError::Config(format!(
                    "AGORA_THREADS must be a positive integer, got `{v}`"
                ))
            }),
        Err(_) => Ok(None),
    }
}

/// Run the market `config.n_replications` times.
///
/// For the coexistence modes `eq` supplies cutoffs and prices; when absent
/// the equilibrium is solved first. It is ignored by the other modes.
pub fn run_simulation(
    config: &SimulationConfig,
    eq: Option<&EquilibriumReport>,
) -> Result<SimulationReport> {
    config.validate()?;
    let dist = config.dist.build()?;
    let model = match (config.mode, eq) {
        (SimulationMode::CoexistenceNash | SimulationMode::CoexistenceDa, Some(eq)) => {
            AnalyticModel::with_equilibrium(&dist, config.mode, config.p, Some(eq.clone()))?
        }
        _ => AnalyticModel::new(&dist, config.mode, config.p)?,
    };
    let market = model.market;
    let bids = model
        .da
        .as_ref()
        .map(|spec| BidTable::new(spec, BID_TABLE_POINTS));
    let masses: Vec<f64> = if market.has_marketplace {
        let (f_lo, f_hi) = (dist.cdf(market.theta_low), dist.cdf(market.theta_high));
        vec![f_lo, f_hi - f_lo, 1.0 - f_hi]
    } else {
        vec![1.0]
    };
    let bins = Bins::new(&masses, config.n_bins);
    let sampler = Sampler::new(&dist);

    let run = || -> Vec<Replication> {
        (0..config.n_replications)
            .into_par_iter()
            .map(|rep| run_replication(config, &sampler, &market, bids.as_ref(), &bins, rep))
            .collect()
    };
    let reps = match thread_count()? {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| AgoraError::Config(e.to_string()))?
            .install(run),
        None => run(),
    };

    let column = |f: &dyn Fn(&Replication) -> f64| -> Vec<f64> { reps.iter().map(f).collect() };
    let welfare: Vec<f64> = reps
        .iter()
        .map(|r| r.welfare_marketplace + r.welfare_decentralized)
        .collect();
    let n_reps = reps.len() as f64;

    let mut bin_payoffs = Vec::with_capacity(bins.total);
    for b in 0..bins.total {
        let mut mids = Vec::new();
        let mut means = Vec::new();
        let mut count = 0;
        for r in &reps {
            if r.bin_count[b] > 0 {
                let c = r.bin_count[b] as f64;
                mids.push(r.bin_theta[b] / c);
                means.push(r.bin_payoff[b] / c);
                count += r.bin_count[b];
            }
        }
        if count == 0 {
            continue;
        }
        let payoff = Estimate::from_samples(&means);
        bin_payoffs.push(BinPayoff {
            bin_mid: mids.iter().sum::<f64>() / mids.len() as f64,
            mean: payoff.mean,
            std_error: payoff.std_error,
            count,
        });
    }

    Ok(SimulationReport {
        config: config.clone(),
        market,
        empirical_profit: Estimate::from_samples(&column(&|r| r.profit)),
        empirical_compensations: Estimate::from_samples(&column(&|r| r.compensations)),
        empirical_welfare: Estimate::from_samples(&welfare),
        welfare_marketplace: Estimate::from_samples(&column(&|r| r.welfare_marketplace)),
        welfare_decentralized: Estimate::from_samples(&column(&|r| r.welfare_decentralized)),
        trades_marketplace: reps
            .iter()
            .map(|r| r.trades_marketplace as f64)
            .sum::<f64>()
            / n_reps,
        trades_decentralized: reps
            .iter()
            .map(|r| r.trades_decentralized as f64)
            .sum::<f64>()
            / n_reps,
        bin_payoffs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinComparison {
    pub bin_mid: f64,
    pub empirical: f64,
    pub analytic: f64,
    pub std_error: f64,
    /// `None` when the bin has no spread but misses the target.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub bins: Vec<BinComparison>,
    pub max_abs_z: f64,
    pub degenerate_bins: usize,
    pub passes: bool,
}

/// Per-bin z-scores of the simulated payoffs against `analytic`, evaluated
/// at each bin's mean valuation. Passes when every `|z| ≤ 4` and no bin is
/// degenerate.
pub fn compare_to_analytic<F: Fn(f64) -> f64>(
    report: &SimulationReport,
    analytic: F,
) -> DiscrepancyReport {
    let mut max_abs_z: f64 = 0.0;
    let mut degenerate_bins = 0;
    let bins: Vec<BinComparison> = report
        .bin_payoffs
        .iter()
        .map(|b| {
            let target = analytic(b.bin_mid);
            let est = Estimate {
                mean: b.mean,
                std_error: b.std_error,
            };
            let z = est.z_score(target);
            match z {
                Some(z) => max_abs_z = max_abs_z.max(z.abs()),
                None => degenerate_bins += 1,
            }
            BinComparison {
                bin_mid: b.bin_mid,
                empirical: b.mean,
                analytic: target,
                std_error: b.std_error,
                z,
            }
        })
        .collect();
    DiscrepancyReport {
        passes: max_abs_z <= Z_LIMIT && degenerate_bins == 0,
        bins,
        max_abs_z,
        degenerate_bins,
    }
}
