//! Valuation distributions on `[0, 1]` and their virtual value/cost transforms.
//!
//! A [`ValuationDistribution`] bundles a CDF, a density and a quantile
//! function. Built-in families:
//!
//! | family | params | CDF |
//! |---|---|---|
//! | `uniform` | none | θ |
//! | `power` | k > 1 | θ^k |
//! | `beta` | α ≥ 1, β ≥ 1 | regularized incomplete beta |
//! | `trunc_exp` | rate λ > 0 | (1 − e^{−λθ}) / (1 − e^{−λ}) |
//! | `trunc_normal` | μ, σ > 0 | normal(μ, σ) conditioned on [0, 1] |
//! | `trunc_logistic` | μ, s > 0 | logistic(μ, s) conditioned on [0, 1] |
//! | `piecewise` | interior breaks, then one density per piece | piecewise linear |
//! | `table` | CSV `theta,cdf` | monotone cubic interpolation |
//!
//! Truncations ([`ValuationDistribution::truncate`]) keep the parent's shape
//! on a sub-interval and renormalize.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::{beta as beta_fn, erf};

use crate::error::{AgoraError, Result};
use crate::numeric::{integrate, invert_cdf};

/// Densities below this are treated as zero by the virtual value/cost.
pub const MIN_DENSITY: f64 = 1e-12;

/// Distance kept from the support endpoints when scanning V and C.
pub const ENDPOINT_GUARD: f64 = 1e-6;

/// Minimum probability mass of a segment that conditional moments accept.
const MIN_MASS: f64 = 1e-15;

/// Serializable description of a distribution, as accepted on the command line.
///
/// ```json
/// {"family": "beta", "params": [2, 2]}
/// {"family": "table", "table_path": "cdf.csv"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_path: Option<PathBuf>,
}

impl DistributionSpec {
    pub fn new(family: &str, params: &[f64]) -> Self {
        Self {
            family: family.to_string(),
            params: params.to_vec(),
            table_path: None,
        }
    }

    /// Parse a family name (`"uniform"`), inline JSON, or `@path` to a JSON file.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(path) = text.strip_prefix('@') {
            let body = std::fs::read_to_string(path)?;
            return Self::parse_json(&body);
        }
        if text.starts_with('{') {
            return Self::parse_json(text);
        }
        Ok(Self::new(text, &[]))
    }

    fn parse_json(body: &str) -> Result<Self> {
        serde_json::from_str(body).map_err(|e| AgoraError::DistributionSpec(e.to_string()))
    }

    pub fn build(&self) -> Result<ValuationDistribution> {
        ValuationDistribution::from_spec(self)
    }
}

/// Monotone piecewise-cubic CDF through tabulated points (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

/// One-sided three-point slope at a table end, clamped to keep the
/// interpolant monotone (the usual shape-preserving end condition).
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m > 3.0 * d0 {
        3.0 * d0
    } else {
        m
    }
}

impl TabulatedCdf {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(AgoraError::DistributionSpec(msg));
        if xs.len() != ys.len() || xs.len() < 2 {
            return bad("table needs at least two (theta, cdf) rows".into());
        }
        if xs[0].abs() > 1e-12 || ys[0].abs() > 1e-12 {
            return bad(format!(
                "table must start at (0, 0), got ({}, {})",
                xs[0], ys[0]
            ));
        }
        let last = xs.len() - 1;
        if (xs[last] - 1.0).abs() > 1e-12 || (ys[last] - 1.0).abs() > 1e-12 {
            return bad(format!(
                "table must end at (1, 1), got ({}, {})",
                xs[last], ys[last]
            ));
        }
        for i in 1..xs.len() {
            if !(xs[i] > xs[i - 1]) || !(ys[i] > ys[i - 1]) {
                return bad(format!("table not strictly increasing at row {}", i + 1));
            }
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes = vec![secants[0]; 2];
        } else {
            slopes[0] = end_slope(xs[1] - xs[0], xs[2] - xs[1], secants[0], secants[1]);
            slopes[n - 1] = end_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                secants[n - 2],
                secants[n - 3],
            );
        }
        for i in 1..n - 1 {
            slopes[i] = 0.5 * (secants[i - 1] + secants[i]);
        }
        for i in 0..n - 1 {
            let d = secants[i];
            let a = slopes[i] / d;
            let b = slopes[i + 1] / d;
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * d;
                slopes[i + 1] = tau * b * d;
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    /// Read a CSV with header `theta,cdf`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols != ["theta", "cdf"] {
            return Err(AgoraError::DistributionSpec(format!(
                "table header must be `theta,cdf`, got `{}`",
                cols.join(",")
            )));
        }
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |k: usize| -> Result<f64> {
                record
                    .get(k)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| {
                        AgoraError::DistributionSpec(format!("bad number in row {}", row + 2))
                    })
            };
            xs.push(parse(0)?);
            ys.push(parse(1)?);
        }
        Self::new(xs, ys)
    }

    fn locate(&self, x: f64) -> usize {
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k => (k - 1).min(self.xs.len() - 2),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1]
    }

    fn pdf(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.ys[i] + d01 * self.ys[i + 1]) / h
            + d10 * self.slopes[i]
            + d11 * self.slopes[i + 1]
    }
}

#[derive(Debug, Clone)]
enum Family {
    Uniform,
    Power {
        k: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
        ln_norm: f64,
    },
    TruncExp {
        rate: f64,
        norm: f64,
    },
    TruncNormal {
        mu: f64,
        sigma: f64,
        phi_lo: f64,
        mass: f64,
    },
    TruncLogistic {
        mu: f64,
        scale: f64,
        l_lo: f64,
        mass: f64,
    },
    Piecewise {
        edges: Vec<f64>,
        densities: Vec<f64>,
        cum: Vec<f64>,
    },
    Table(TabulatedCdf),
    Truncated {
        base: Arc<ValuationDistribution>,
        lo: f64,
        hi: f64,
        f_lo: f64,
        mass: f64,
    },
}

/// A continuous valuation distribution supported on a sub-interval of `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ValuationDistribution {
    family: Family,
    name: String,
    params: Vec<f64>,
    spec: Option<DistributionSpec>,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / std::f64::consts::SQRT_2)
}

fn logistic_cdf(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl ValuationDistribution {
    fn make(family: Family, name: &str, params: Vec<f64>) -> Self {
        let spec = match &family {
            Family::Truncated { .. } | Family::Table(_) => None,
            _ => Some(DistributionSpec::new(name, &params)),
        };
        Self {
            family,
            name: name.to_string(),
            params,
            spec,
        }
    }

    pub fn uniform() -> Self {
        Self::make(Family::Uniform, "uniform", vec![])
    }

    /// F(θ) = θ^k with k > 1.
    pub fn power(k: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(AgoraError::DistributionSpec(format!(
                "power needs k > 1, got {k}"
            )));
        }
        Ok(Self::make(Family::Power { k }, "power", vec![k]))
    }

    /// Beta(α, β) with α, β ≥ 1 so the density stays bounded.
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 1.0 && beta >= 1.0) || !(alpha.is_finite() && beta.is_finite()) {
            return Err(AgoraError::DistributionSpec(format!(
                "beta needs alpha, beta >= 1, got ({alpha}, {beta})"
            )));
        }
        let ln_norm = beta_fn::ln_beta(alpha, beta);
        Ok(Self::make(
            Family::Beta {
                alpha,
                beta,
                ln_norm,
            },
            "beta",
            vec![alpha, beta],
        ))
    }

    /// Exponential with rate λ conditioned on `[0, 1]`.
    pub fn trunc_exp(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(AgoraError::DistributionSpec(format!(
                "trunc_exp needs rate > 0, got {rate}"
            )));
        }
        let norm = -(-rate).exp_m1();
        Ok(Self::make(
            Family::TruncExp { rate, norm },
            "trunc_exp",
            vec![rate],
        ))
    }

    /// Normal(μ, σ) conditioned on `[0, 1]`.
    pub fn trunc_normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
            return Err(AgoraError::DistributionSpec(format!(
                "trunc_normal needs sigma > 0, got ({mu}, {sigma})"
            )));
        }
        let phi_lo = std_normal_cdf(-mu / sigma);
        let mass = std_normal_cdf((1.0 - mu) / sigma) - phi_lo;
        if mass < 1e-12 {
            return Err(AgoraError::DistributionSpec(
                "trunc_normal has no mass on [0, 1]".into(),
            ));
        }
        Ok(Self::make(
            Family::TruncNormal {
                mu,
                sigma,
                phi_lo,
                mass,
            },
            "trunc_normal",
            vec![mu, sigma],
        ))
    }

    /// Logistic(μ, s) conditioned on `[0, 1]`.
    pub fn trunc_logistic(mu: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !mu.is_finite() || !scale.is_finite() {
            return Err(AgoraError::DistributionSpec(format!(
                "trunc_logistic needs s > 0, got ({mu}, {scale})"
            )));
        }
        let l_lo = logistic_cdf(-mu / scale);
        let mass = logistic_cdf((1.0 - mu) / scale) - l_lo;
        if mass < 1e-12 {
            return Err(AgoraError::DistributionSpec(
                "trunc_logistic has no mass on [0, 1]".into(),
            ));
        }
        Ok(Self::make(
            Family::TruncLogistic {
                mu,
                scale,
                l_lo,
                mass,
            },
            "trunc_logistic",
            vec![mu, scale],
        ))
    }

    /// Piecewise-constant density. `breaks` are the interior breakpoints,
    /// `weights` the (unnormalized, positive) density on each of the
    /// `breaks.len() + 1` pieces.
    pub fn piecewise(breaks: &[f64], weights: &[f64]) -> Result<Self> {
        if weights.len() != breaks.len() + 1 {
            return Err(AgoraError::DistributionSpec(
                "piecewise needs one more density than interior breakpoint".into(),
            ));
        }
        let mut edges = Vec::with_capacity(breaks.len() + 2);
        edges.push(0.0);
        edges.extend_from_slice(breaks);
        edges.push(1.0);
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(AgoraError::DistributionSpec(
                "piecewise breakpoints must be strictly increasing inside (0, 1)".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(AgoraError::DistributionSpec(
                "piecewise densities must be positive".into(),
            ));
        }
        let total: f64 = weights
            .iter()
            .zip(edges.windows(2))
            .map(|(w, e)| w * (e[1] - e[0]))
            .sum();
        let densities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cum = vec![0.0];
        for (d, e) in densities.iter().zip(edges.windows(2)) {
            let last = *cum.last().unwrap();
            cum.push(last + d * (e[1] - e[0]));
        }
        *cum.last_mut().unwrap() = 1.0;
        let mut params = breaks.to_vec();
        params.extend_from_slice(weights);
        Ok(Self::make(
            Family::Piecewise {
                edges,
                densities,
                cum,
            },
            "piecewise",
            params,
        ))
    }

    /// Tabulated CDF with monotone cubic interpolation.
    pub fn table(table: TabulatedCdf) -> Self {
        let mut params = Vec::with_capacity(2 * table.xs.len());
        params.extend_from_slice(&table.xs);
        params.extend_from_slice(&table.ys);
        Self::make(Family::Table(table), "table", params)
    }

    pub fn from_spec(spec: &DistributionSpec) -> Result<Self> {
        let p = &spec.params;
        let arity = |n: usize| -> Result<()> {
            if p.len() == n {
                Ok(())
            } else {
                Err(AgoraError::DistributionSpec(format!(
                    "{} takes {} params, got {}",
                    spec.family,
                    n,
                    p.len()
                )))
            }
        };
        let dist = match spec.family.as_str() {
            "uniform" => {
                arity(0)?;
                Self::uniform()
            }
            "power" if p.is_empty() => Self::power(2.0)?,
            "power" => {
                arity(1)?;
                Self::power(p[0])?
            }
            "beta" if p.is_empty() => Self::beta(2.0, 2.0)?,
            "beta" => {
                arity(2)?;
                Self::beta(p[0], p[1])?
            }
            "trunc_exp" if p.is_empty() => Self::trunc_exp(1.0)?,
            "trunc_exp" => {
                arity(1)?;
                Self::trunc_exp(p[0])?
            }
            "trunc_normal" if p.is_empty() => Self::trunc_normal(0.5, 0.2)?,
            "trunc_normal" => {
                arity(2)?;
                Self::trunc_normal(p[0], p[1])?
            }
            "trunc_logistic" if p.is_empty() => Self::trunc_logistic(0.5, 0.1)?,
            "trunc_logistic" => {
                arity(2)?;
                Self::trunc_logistic(p[0], p[1])?
            }
            "piecewise" => {
                if p.len().is_multiple_of(2) {
                    return Err(AgoraError::DistributionSpec(
                        "piecewise params are k breakpoints followed by k + 1 densities".into(),
                    ));
                }
                let k = (p.len() - 1) / 2;
                Self::piecewise(&p[..k], &p[k..])?
            }
            "table" => {
                let path = spec.table_path.as_ref().ok_or_else(|| {
                    AgoraError::DistributionSpec("table family needs `table_path`".into())
                })?;
                Self::table(TabulatedCdf::from_csv(path)?)
            }
            other => {
                return Err(AgoraError::DistributionSpec(format!(
                    "unknown family `{other}`"
                )));
            }
        };
        Ok(Self {
            spec: Some(spec.clone()),
            ..dist
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// The [`DistributionSpec`] this distribution was built from, when it has one.
    pub fn spec(&self) -> Option<&DistributionSpec> {
        self.spec.as_ref()
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.family, Family::Uniform)
    }

    /// Support `[lo, hi]`; `[0, 1]` except for truncations.
    pub fn support(&self) -> (f64, f64) {
        match &self.family {
            Family::Truncated { lo, hi, .. } => (*lo, *hi),
            _ => (0.0, 1.0),
        }
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        let (lo, hi) = self.support();
        if theta <= lo {
            return 0.0;
        }
        if theta >= hi {
            return 1.0;
        }
        let value = match &self.family {
            Family::Uniform => theta,
            Family::Power { k } => theta.powf(*k),
            Family::Beta { alpha, beta, .. } => beta_fn::beta_reg(*alpha, *beta, theta),
            Family::TruncExp { rate, norm } => -(-rate * theta).exp_m1() / norm,
            Family::TruncNormal {
                mu,
                sigma,
                phi_lo,
                mass,
            } => (std_normal_cdf((theta - mu) / sigma) - phi_lo) / mass,
            Family::TruncLogistic {
                mu,
                scale,
                l_lo,
                mass,
            } => (logistic_cdf((theta - mu) / scale) - l_lo) / mass,
            Family::Piecewise {
                edges,
                densities,
                cum,
            } => {
                let i = edges.partition_point(|&e| e <= theta).saturating_sub(1);
                let i = i.min(densities.len() - 1);
                cum[i] + densities[i] * (theta - edges[i])
            }
            Family::Table(t) => t.cdf(theta),
            Family::Truncated {
                base, f_lo, mass, ..
            } => (base.cdf(theta) - f_lo) / mass,
        };
        value.clamp(0.0, 1.0)
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        let (lo, hi) = self.support();
        if theta < lo || theta > hi {
            return 0.0;
        }
        let value = match &self.family {
            Family::Uniform => 1.0,
            Family::Power { k } => k * theta.powf(k - 1.0),
            Family::Beta {
                alpha,
                beta,
                ln_norm,
            } => {
                if (theta == 0.0 && *alpha > 1.0) || (theta == 1.0 && *beta > 1.0) {
                    0.0
                } else {
                    ((alpha - 1.0) * theta.ln() + (beta - 1.0) * (1.0 - theta).ln() - ln_norm).exp()
                }
            }
            Family::TruncExp { rate, norm } => rate * (-rate * theta).exp() / norm,
            Family::TruncNormal {
                mu, sigma, mass, ..
            } => {
                let z = (theta - mu) / sigma;
                (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma * mass)
            }
            Family::TruncLogistic {
                mu, scale, mass, ..
            } => {
                let e = (-(theta - mu) / scale).exp();
                e / (scale * (1.0 + e) * (1.0 + e) * mass)
            }
            Family::Piecewise {
                edges, densities, ..
            } => {
                let i = edges.partition_point(|&e| e <= theta).saturating_sub(1);
                densities[i.min(densities.len() - 1)]
            }
            Family::Table(t) => t.pdf(theta).max(0.0),
            Family::Truncated { base, mass, .. } => base.pdf(theta) / mass,
        };
        value.max(0.0)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        let value = match &self.family {
            Family::Uniform => u,
            Family::Power { k } => u.powf(1.0 / k),
            Family::TruncExp { rate, norm } => -(-u * norm).ln_1p() / rate,
            Family::TruncLogistic {
                mu,
                scale,
                l_lo,
                mass,
            } => {
                let v = l_lo + u * mass;
                mu + scale * (v / (1.0 - v)).ln()
            }
            Family::Piecewise {
                edges,
                densities,
                cum,
            } => {
                let i = cum.partition_point(|&c| c <= u).saturating_sub(1);
                let i = i.min(densities.len() - 1);
                edges[i] + (u - cum[i]) / densities[i]
            }
            Family::Truncated {
                base, f_lo, mass, ..
            } => base.quantile(f_lo + u * mass),
            _ => invert_cdf(|x| self.cdf(x), u, lo, hi),
        };
        value.clamp(lo, hi)
    }

    /// Whether [`Self::quantile`] is closed form rather than a bisection.
    pub(crate) fn quantile_is_cheap(&self) -> bool {
        match &self.family {
            Family::Beta { .. } | Family::TruncNormal { .. } | Family::Table(_) => false,
            Family::Truncated { base, .. } => base.quantile_is_cheap(),
            _ => true,
        }
    }

    /// Median, `F⁻¹(1/2)`.
    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// `V(θ) = θ − (1 − F(θ)) / f(θ)`.
    pub fn virtual_value(&self, theta: f64) -> Result<f64> {
        let density = self.density_checked(theta)?;
        Ok(theta - (1.0 - self.cdf(theta)) / density)
    }

    /// `C(θ) = θ + F(θ) / f(θ)`.
    pub fn virtual_cost(&self, theta: f64) -> Result<f64> {
        let density = self.density_checked(theta)?;
        Ok(theta + self.cdf(theta) / density)
    }

    fn density_checked(&self, theta: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(theta >= lo && theta <= hi) {
            return Err(AgoraError::InvalidArgument(format!(
                "theta = {theta} outside support [{lo}, {hi}]"
            )));
        }
        let density = self.pdf(theta);
        if !(density >= MIN_DENSITY) {
            return Err(AgoraError::DegenerateDensity { theta, density });
        }
        Ok(density)
    }

    /// Scan V and C on `grid_n` points of `[lo + ε, hi − ε]`.
    pub fn check_regularity(&self, grid_n: usize) -> RegularityReport {
        let grid_n = grid_n.max(100);
        let (lo, hi) = self.support();
        let (a, b) = (lo + ENDPOINT_GUARD, hi - ENDPOINT_GUARD);
        let step = (b - a) / (grid_n - 1) as f64;
        let mut violations = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..grid_n {
            let theta = if i + 1 == grid_n {
                b
            } else {
                a + step * i as f64
            };
            match (self.virtual_value(theta), self.virtual_cost(theta)) {
                (Ok(v), Ok(c)) => {
                    if let Some((pv, pc)) = prev {
                        if v < pv - 1e-12 * (1.0 + pv.abs()) {
                            violations.push((theta, Transform::VirtualValue));
                        }
                        if c < pc - 1e-12 * (1.0 + pc.abs()) {
                            violations.push((theta, Transform::VirtualCost));
                        }
                    }
                    prev = Some((v, c));
                }
                _ => {
                    violations.push((theta, Transform::Density));
                    prev = None;
                }
            }
        }
        RegularityReport {
            is_regular: violations.is_empty(),
            violation_points: violations,
            grid_size: grid_n,
        }
    }

    /// Error unless the distribution passes [`check_regularity`](Self::check_regularity).
    pub fn require_regular(&self) -> Result<()> {
        let report = self.check_regularity(REGULARITY_GRID);
        match report.violation_points.first() {
            None => Ok(()),
            Some(&(first, _)) => Err(AgoraError::NotRegular {
                count: report.violation_points.len(),
                first,
            }),
        }
    }

    /// `∫ₐᵇ x f(x) dx`.
    pub fn partial_moment(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        integrate(|x| x * self.pdf(x), a, b)
    }

    fn mass_checked(&self, a: f64, b: f64) -> Result<f64> {
        if !(a < b) || a < 0.0 || b > 1.0 {
            return Err(AgoraError::InvalidArgument(format!(
                "segment needs 0 <= a < b <= 1, got [{a}, {b}]"
            )));
        }
        let mass = self.cdf(b) - self.cdf(a);
        if mass <= MIN_MASS {
            return Err(AgoraError::EmptySegment { a, b, mass });
        }
        Ok(mass)
    }

    /// `E[x | x ∈ [a, b]]`.
    pub fn conditional_mean(&self, a: f64, b: f64) -> Result<f64> {
        let mass = self.mass_checked(a, b)?;
        let mean = self.partial_moment(a, b) / mass;
        Ok(mean.clamp(a, b))
    }

    /// `E[h(x) | x ∈ [a, b]]` for an arbitrary integrand.
    pub fn conditional_expectation<H: Fn(f64) -> f64>(&self, a: f64, b: f64, h: H) -> Result<f64> {
        let mass = self.mass_checked(a, b)?;
        Ok(integrate(|x| h(x) * self.pdf(x), a, b) / mass)
    }

    /// The distribution conditioned on `[a, b]`.
    pub fn truncate(&self, a: f64, b: f64) -> Result<ValuationDistribution> {
        let mass = self.mass_checked(a, b)?;
        let base = Arc::new(self.clone());
        Ok(Self::make(
            Family::Truncated {
                f_lo: self.cdf(a),
                base,
                lo: a,
                hi: b,
                mass,
            },
            &format!("{}|[{a},{b}]", self.name),
            vec![a, b],
        ))
    }
}

impl fmt::Display for ValuationDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_empty() || matches!(self.family, Family::Table(_)) {
            write!(f, "{}", self.name)
        } else {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p}")).collect();
            write!(f, "{}({})", self.name, ps.join(", "))
        }
    }
}

/// Grid used by [`ValuationDistribution::require_regular`].
pub const REGULARITY_GRID: usize = 1000;

/// Which monotonicity condition failed at a scanned point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    VirtualValue,
    VirtualCost,
    /// Density too small to evaluate V or C.
    Density,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub is_regular: bool,
    pub violation_points: Vec<(f64, Transform)>,
    pub grid_size: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bimodal() -> ValuationDistribution {
        ValuationDistribution::piecewise(&[0.25, 0.75], &[1.9, 0.1, 1.9]).unwrap()
    }

    #[test]
    fn virtual_value_and_cost_examples() {
        let u = ValuationDistribution::uniform();
        assert!(u.virtual_value(0.5).unwrap().abs() < 1e-15);
        assert!((u.virtual_cost(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((u.virtual_value(1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!(u.virtual_cost(1e-9).unwrap().abs() < 1e-8);

        let sq = ValuationDistribution::power(2.0).unwrap();
        assert!((sq.virtual_value(0.8).unwrap() - 0.575).abs() < 1e-12);
        assert!((sq.virtual_cost(0.4).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn degenerate_density_is_an_error() {
        let b = ValuationDistribution::beta(3.0, 3.0).unwrap();
        assert!(matches!(
            b.virtual_value(0.0),
            Err(AgoraError::DegenerateDensity { .. })
        ));
    }

    #[test]
    fn regularity_examples() {
        assert!(
            ValuationDistribution::uniform()
                .check_regularity(1000)
                .is_regular
        );
        assert!(
            ValuationDistribution::power(3.0)
                .unwrap()
                .check_regularity(1000)
                .is_regular
        );
        let report = bimodal().check_regularity(1000);
        assert!(!report.is_regular);
        assert!(report
            .violation_points
            .iter()
            .any(|&(t, w)| (t - 0.25).abs() < 2e-3 && w == Transform::VirtualValue));
    }

    #[test]
    fn bimodal_virtual_value_jumps_at_quarter() {
        let d = bimodal();
        let below = d.virtual_value(0.25 - 1e-12).unwrap();
        let above = d.virtual_value(0.25 + 1e-12).unwrap();
        assert!((below - (-0.0263157894736842)).abs() < 1e-6, "{below}");
        assert!((above - (-5.0)).abs() < 1e-6, "{above}");
    }

    #[test]
    fn conditional_means() {
        let u = ValuationDistribution::uniform();
        assert!((u.conditional_mean(0.25, 0.75).unwrap() - 0.5).abs() < 1e-12);
        assert!((u.conditional_mean(0.1, 0.9).unwrap() - 0.5).abs() < 1e-12);
        let sq = ValuationDistribution::power(2.0).unwrap();
        assert!((sq.conditional_mean(0.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-10);
        assert!(matches!(
            u.conditional_mean(0.3, 0.3),
            Err(AgoraError::InvalidArgument(_))
        ));
        let pw = ValuationDistribution::piecewise(&[0.5], &[1.0, 1e-300]).unwrap();
        assert!(matches!(
            pw.conditional_mean(0.6, 0.7),
            Err(AgoraError::EmptySegment { .. })
        ));
    }

    #[test]
    fn truncation_examples() {
        let t = ValuationDistribution::uniform()
            .truncate(0.25, 0.75)
            .unwrap();
        assert!((t.cdf(0.5) - 0.5).abs() < 1e-15);
        assert!((t.quantile(0.5) - 0.5).abs() < 1e-15);
        assert!((t.pdf(0.5) - 2.0).abs() < 1e-15);
        let sq = ValuationDistribution::power(2.0)
            .unwrap()
            .truncate(0.0, 0.5)
            .unwrap();
        assert!((sq.cdf(0.25) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn spec_parsing() {
        let s = DistributionSpec::parse(r#"{"family":"beta","params":[2,2]}"#).unwrap();
        let d = s.build().unwrap();
        assert_eq!(d.to_string(), "beta(2, 2)");
        assert_eq!(
            DistributionSpec::parse("uniform").unwrap().family,
            "uniform"
        );
        assert!(DistributionSpec::parse("nope").unwrap().build().is_err());
        assert!(DistributionSpec::parse(r#"{"family":"table"}"#)
            .unwrap()
            .build()
            .is_err());
        assert!(DistributionSpec::new("beta", &[0.5, 2.0]).build().is_err());
    }

    #[test]
    fn table_rejects_non_monotone() {
        assert!(TabulatedCdf::new(vec![0.0, 0.5, 0.4, 1.0], vec![0.0, 0.5, 0.6, 1.0]).is_err());
        assert!(TabulatedCdf::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.4]).is_err());
        assert!(TabulatedCdf::new(vec![0.0, 1.0], vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn table_reproduces_uniform() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let t = ValuationDistribution::table(TabulatedCdf::new(xs.clone(), xs).unwrap());
        for &x in &[0.05, 0.33, 0.71] {
            assert!((t.cdf(x) - x).abs() < 1e-12);
            assert!((t.pdf(x) - 1.0).abs() < 1e-12);
            assert!((t.quantile(x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_table_of_a_regular_cdf_stays_regular() {
        let xs: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x * x * (3.0 - 2.0 * x)).collect();
        let t = ValuationDistribution::table(TabulatedCdf::new(xs, ys).unwrap());
        assert!(t.check_regularity(REGULARITY_GRID).is_regular);
        assert!(t.pdf(0.0) < 0.01);
    }
}
