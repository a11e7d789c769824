//! Revenue-optimal (Myerson) and efficiency-optimal (VCG) auctions over
//! monotone-hazard-rate value distributions.
//!
//! The crate is split into four layers:
//!
//! - [`distributions`]: value distributions, hazard rates, reserve prices and
//!   the structural checks (MHR, regularity, pointwise domination).
//! - [`auctions`]: the truthful mechanisms EMA (VCG) and RMA (Myerson,
//!   reserve-price form) for `t` identical unit-demand items.
//! - [`analysis`]: closed-form and quadrature evaluation of the Gain/Loss
//!   calculus, the bidder-count bounds and the regular-distribution
//!   counterexample.
//! - [`simulate`]: a seeded, thread-count independent Monte Carlo engine with
//!   common random numbers.

// Negated comparisons are how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod auctions;
pub mod distributions;
mod error;
pub mod numeric;
pub mod simulate;

pub use analysis::{BoundSet, GainLossReport, RegularCounterexample};
pub use auctions::{AuctionOutcome, BidVector};
pub use distributions::{
    Atom, DistributionSpec, Exponential, GFamily, MhrReport, PFamily, Uniform, ValueDistribution,
};
pub use error::{Error, Result};
pub use simulate::{
    Estimate, MechanismEstimate, MechanismKind, PairedEstimate, Ratio, RatioReport,
    RevenueComparison, SimConfig,
};

/// `1 - 1/e`, the largest value the cdf of an MHR distribution can take at
/// its reserve price.
pub const ALPHA: f64 = 1.0 - 1.0 / std::f64::consts::E;
