//! The regular (non-MHR) distribution `P_{eps,r}` defeats any fixed number of
//! extra bidders: for small enough `eps`, the efficiency lost to the reserve
//! exceeds what `m` extra bidders can add.

use serde::{Deserialize, Serialize};

use crate::numeric::NeumaierSum;
use crate::numeric::adaptive_simpson;
use crate::{Error, Result};

/// Smallest `eps` tried before giving up.
const EPS_FLOOR: f64 = 1e-15;

/// `r (1 - (1 - eps/(r+eps))^m)`, the most `m` extra bidders can add.
pub fn regular_gain(m: u32, r: f64, eps: f64) -> f64 {
    let below = -eps / (r + eps);
    -r * (m as f64 * below.ln_1p()).exp_m1()
}

/// `int_0^r x d(P^k)(x)` over the continuous part `[0, r)`.
///
/// The density of the maximum is concentrated on a scale of `eps` near 0, so
/// the range is split geometrically at `eps, 2 eps, 4 eps, ...`.
pub fn regular_loss(k: u32, r: f64, eps: f64) -> f64 {
    let kf = k as f64;
    let integrand = |x: f64| {
        let xe = x + eps;
        x * kf * (x / xe).powi(k as i32 - 1) * eps / (xe * xe)
    };
    let mut edges = vec![0.0];
    let mut x = eps;
    while x < r {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(r);
    let tol = 1e-10 * eps.min(r) / edges.len() as f64;
    let sum: NeumaierSum = edges.windows(2).map(|w| adaptive_simpson(integrand, w[0], w[1], tol)).collect();
    sum.total()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularCounterexample {
    pub k: u32,
    pub m: u32,
    pub r: f64,
    /// The `eps` of `P_{eps,r}` at which loss first exceeds gain.
    pub eps: f64,
    pub loss: f64,
    pub gain: f64,
}

impl RegularCounterexample {
    pub fn margin(&self) -> f64 {
        self.loss - self.gain
    }
}

/// Halves `eps` starting from `r` until the loss of `P_{eps,r}` with `k`
/// bidders exceeds the gain from `m` extra bidders.
pub fn regular_counterexample_search(k: u32, m: u32, r: f64) -> Result<RegularCounterexample> {
    if k == 0 || m == 0 || !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("need k, m >= 1 and r > 0 (got {k}, {m}, {r})")));
    }
    let mut eps = r;
    while eps >= EPS_FLOOR {
        let loss = regular_loss(k, r, eps);
        let gain = regular_gain(m, r, eps);
        if loss > gain {
            return Ok(RegularCounterexample { k, m, r, eps, loss, gain });
        }
        eps *= 0.5;
    }
    Err(Error::SearchExhausted { k, m, floor: EPS_FLOOR })
}
