//! Truthful mechanisms for `t` identical items and unit-demand bidders.
//!
//! Ties are broken by lowest bidder index, which makes every outcome a pure
//! function of the bid vector.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nonempty vector of finite, nonnegative bids. Index is bidder identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BidVector(Vec<f64>);

impl BidVector {
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        if bids.is_empty() {
            return Err(Error::InvalidParameter("bid vector is empty".into()));
        }
        if let Some(b) = bids.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::InvalidParameter(format!("bid {b} is not a finite nonnegative number")));
        }
        Ok(BidVector(bids))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for BidVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        BidVector::new(v)
    }
}

impl From<BidVector> for Vec<f64> {
    fn from(b: BidVector) -> Self {
        b.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub winners: BTreeSet<usize>,
    pub payments: BTreeMap<usize, f64>,
    /// Sum of the winners' bids.
    pub efficiency: f64,
    /// Sum of the payments.
    pub revenue: f64,
}

/// Efficiency and revenue of one auction without the allocation detail.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub efficiency: f64,
    pub revenue: f64,
}

/// Writes bidder indices into `order` sorted by bid descending, then index
/// ascending.
fn rank(bids: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..bids.len());
    order.sort_unstable_by(|&a, &b| bids[b].total_cmp(&bids[a]).then(a.cmp(&b)));
}

/// The `(t+1)`-th highest bid, or 0 if there are at most `t` bids.
fn clearing_bid(bids: &[f64], order: &[usize], t: usize) -> f64 {
    order.get(t).map_or(0.0, |&i| bids[i])
}

/// Number of winners and the per-winner price.
fn ema_rule(bids: &[f64], order: &[usize], t: usize) -> (usize, f64) {
    (t.min(bids.len()), clearing_bid(bids, order, t))
}

fn rma_rule(bids: &[f64], order: &[usize], t: usize, reserve: f64) -> (usize, f64) {
    // bids at or above the reserve form a prefix of `order`
    let eligible = order.iter().take_while(|&&i| bids[i] >= reserve).count();
    (t.min(eligible), reserve.max(clearing_bid(bids, order, t)))
}

fn totals(bids: &[f64], order: &[usize], (winners, price): (usize, f64)) -> Totals {
    let efficiency = order[..winners].iter().map(|&i| bids[i]).sum();
    Totals { efficiency, revenue: price * winners as f64 }
}

fn outcome(bids: &[f64], order: &[usize], (winners, price): (usize, f64)) -> AuctionOutcome {
    let Totals { efficiency, revenue } = totals(bids, order, (winners, price));
    let winners: BTreeSet<usize> = order[..winners].iter().copied().collect();
    let payments = winners.iter().map(|&i| (i, price)).collect();
    AuctionOutcome { winners, payments, efficiency, revenue }
}

/// Efficiency-maximizing (VCG) auction: the `t` highest bidders win and each
/// pays the `(t+1)`-th highest bid (0 if it does not exist).
pub fn ema(bids: &BidVector, t: usize) -> Result<AuctionOutcome> {
    check_supply(t)?;
    let mut order = Vec::with_capacity(bids.len());
    rank(bids.as_slice(), &mut order);
    Ok(outcome(bids.as_slice(), &order, ema_rule(bids.as_slice(), &order, t)))
}

/// Revenue-maximizing (Myerson) auction in reserve-price form.
///
/// Among bidders with bid `>= reserve`, the `min(t, count)` highest win. Each
/// pays `max(reserve, (t+1)-th highest bid overall)`; a missing `(t+1)`-th bid
/// counts as 0, so the reserve is the price floor.
pub fn rma(bids: &BidVector, t: usize, reserve: f64) -> Result<AuctionOutcome> {
    check_supply(t)?;
    if !(reserve.is_finite() && reserve > 0.0) {
        return Err(Error::InvalidParameter(format!("reserve must be positive, got {reserve}")));
    }
    let mut order = Vec::with_capacity(bids.len());
    rank(bids.as_slice(), &mut order);
    Ok(outcome(bids.as_slice(), &order, rma_rule(bids.as_slice(), &order, t, reserve)))
}

fn check_supply(t: usize) -> Result<()> {
    if t == 0 {
        Err(Error::InvalidParameter("item supply t must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Allocation-free evaluation used by the simulator. `order` is scratch
/// space. Inputs are assumed valid.
pub(crate) fn ema_totals(bids: &[f64], t: usize, order: &mut Vec<usize>) -> Totals {
    rank(bids, order);
    totals(bids, order, ema_rule(bids, order, t))
}

pub(crate) fn rma_totals(bids: &[f64], t: usize, reserve: f64, order: &mut Vec<usize>) -> Totals {
    rank(bids, order);
    totals(bids, order, rma_rule(bids, order, t, reserve))
}
