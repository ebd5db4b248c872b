//! Expected payoffs in the decentralized market under random matching and
//! Nash bargaining.
//!
//! An agent who enters the search market meets a partner with probability
//! `p`. The partner's valuation is drawn from the types who search, the
//! higher valuation buys, and the two split the surplus `|θ − x|` equally.

use serde::{Deserialize, Serialize};

use crate::distributions::ValuationDistribution;
use crate::error::{AgoraError, Result};

/// Mass below which a search market is treated as empty.
const EMPTY_MASS: f64 = 1e-14;

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(AgoraError::InvalidArgument(format!(
            "matching probability must lie in [0, 1], got {p}"
        )))
    }
}

/// The set of types that trade in the search market, plus the matching
/// probability `p` (the efficiency of the matching function is `p / 2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationSpec {
    pub segments: Vec<(f64, f64)>,
    pub p: f64,
}

impl SegmentationSpec {
    pub fn new(segments: Vec<(f64, f64)>, p: f64) -> Result<Self> {
        check_probability(p)?;
        if segments.is_empty() || segments.len() > 2 {
            return Err(AgoraError::InvalidArgument(
                "a segmentation has one or two intervals".into(),
            ));
        }
        for &(a, b) in &segments {
            if !(0.0 <= a && a <= b && b <= 1.0) {
                return Err(AgoraError::InvalidArgument(format!(
                    "invalid interval [{a}, {b}]"
                )));
            }
        }
        if segments.len() == 2 && !(segments[0].1 < segments[1].0) {
            return Err(AgoraError::InvalidArgument(
                "intervals must be disjoint and ordered".into(),
            ));
        }
        Ok(Self { segments, p })
    }

    pub fn interval(low: f64, high: f64, p: f64) -> Result<Self> {
        Self::new(vec![(low, high)], p)
    }

    /// Build from the matching efficiency `m ∈ [0, 1/2]`.
    pub fn with_efficiency(segments: Vec<(f64, f64)>, m: f64) -> Result<Self> {
        Self::new(segments, 2.0 * m)
    }

    pub fn efficiency(&self) -> f64 {
        self.p / 2.0
    }

    /// Probability mass of the searching types.
    pub fn mass(&self, dist: &ValuationDistribution) -> f64 {
        self.segments
            .iter()
            .map(|&(a, b)| dist.cdf(b) - dist.cdf(a))
            .sum()
    }
}

fn segment_mass(dist: &ValuationDistribution, low: f64, high: f64) -> Result<(f64, f64, f64)> {
    if !(low < high) {
        return Err(AgoraError::InvalidArgument(format!(
            "search segment needs low < high, got ({low}, {high})"
        )));
    }
    let (f_low, f_high) = (dist.cdf(low), dist.cdf(high));
    let mass = f_high - f_low;
    if mass <= EMPTY_MASS {
        return Err(AgoraError::EmptySegment {
            a: low,
            b: high,
            mass,
        });
    }
    Ok((f_low, f_high, mass))
}

/// Expected search payoff of type `theta` when the types in `[low, high]`
/// search.
///
/// Types below the segment always sell and earn `(p/2)(E_d − θ)`; types above
/// always buy and earn `(p/2)(θ − E_d)`, where `E_d` is the mean searching
/// valuation. Inside, the agent sells to higher and buys from lower types.
pub fn search_payoff(
    dist: &ValuationDistribution,
    low: f64,
    high: f64,
    p: f64,
    theta: f64,
) -> Result<f64> {
    check_probability(p)?;
    let (f_low, f_high, mass) = segment_mass(dist, low, high)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let u = if theta < low || theta > high {
        let mean = dist.partial_moment(low, high) / mass;
        0.5 * p * (mean - theta).abs()
    } else {
        let upper = dist.partial_moment(theta, high);
        let lower = dist.partial_moment(low, theta);
        let f = dist.cdf(theta);
        p / (2.0 * mass) * (upper - lower + theta * (2.0 * f - f_high - f_low))
    };
    // The interior branch can round a hair below zero at its minimum.
    Ok(u.max(0.0))
}

/// Search payoff for an arbitrary one- or two-interval segmentation:
/// `p/(2μ)·E[|x − θ|; x ∈ Θ^d]`.
pub fn search_payoff_general(
    dist: &ValuationDistribution,
    seg: &SegmentationSpec,
    theta: f64,
) -> Result<f64> {
    let mu = seg.mass(dist);
    if mu <= EMPTY_MASS {
        let (a, b) = (seg.segments[0].0, seg.segments[seg.segments.len() - 1].1);
        return Err(AgoraError::EmptySegment { a, b, mass: mu });
    }
    if seg.p == 0.0 {
        return Ok(0.0);
    }
    let mut above = 0.0;
    for &(a, b) in &seg.segments {
        if b > theta {
            let from = a.max(theta);
            above += dist.partial_moment(from, b) - theta * (dist.cdf(b) - dist.cdf(from));
        }
        if a < theta {
            let to = b.min(theta);
            above += theta * (dist.cdf(to) - dist.cdf(a)) - dist.partial_moment(a, to);
        }
    }
    Ok((seg.p / (2.0 * mu) * above).max(0.0))
}

/// Derivative of [`search_payoff`] in `theta`: `−p/2` below the segment,
/// `p/2` above it, and `p(2F(θ) − F(low) − F(high)) / (2ΔF)` inside.
///
/// The derivative is continuous, so at the segment bounds the interior
/// expression (which equals `∓p/2` there) is returned.
pub fn search_payoff_slope(
    dist: &ValuationDistribution,
    low: f64,
    high: f64,
    p: f64,
    theta: f64,
) -> Result<f64> {
    check_probability(p)?;
    let (f_low, f_high, mass) = segment_mass(dist, low, high)?;
    Ok(if theta < low {
        -0.5 * p
    } else if theta > high {
        0.5 * p
    } else {
        p * (2.0 * dist.cdf(theta) - f_low - f_high) / (2.0 * mass)
    })
}
