//! Profit-maximizing marketplaces that compete with a frictional
//! decentralized market.
//!
//! The crate computes the optimal posted-price marketplace with and without
//! a search market alongside it, the coexistence equilibrium under Nash
//! bargaining or a midpoint double auction, profits, compensations and
//! welfare, and checks each closed form against a seeded Monte Carlo market.
//!
//! ```
//! use agora::{coexistence, distributions::ValuationDistribution};
//!
//! let uniform = ValuationDistribution::uniform();
//! let eq = coexistence::solve_coexistence(&uniform, 1.0, 1e-12).unwrap();
//! assert!((eq.theta_low - 0.25).abs() < 1e-9);
//! assert!((eq.profit - 0.0625).abs() < 1e-9);
//! ```

// `!(a < b)` is used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coexistence;
pub mod competition;
pub mod distributions;
pub mod double_auction;
pub mod error;
pub mod mechanism;
pub mod numeric;
pub mod search;
pub mod simulator;
pub mod welfare;

pub use distributions::{DistributionSpec, ValuationDistribution};
pub use error::{AgoraError, Result};
