//! Gain/Loss calculus for the single-item comparison of RMA(k+m) and EMA(k),
//! the bidder-count bounds, and the multi-item and regular-distribution
//! extensions.
//!
//! Conditioned on all `k` original bidders falling below the reserve `r`,
//! EMA keeps the expected maximum of those bids (the *loss*), while the `m`
//! extra bidders of RMA contribute at least `(1 - F(r)^m) r` (the *gain*).
//!
//! Every closed form here is evaluated through the logarithmic tail
//! `sum_{i>k} x^i / i = -ln(1-x) - sum_{i<=k} x^i / i` computed directly as a
//! series. The difference form cancels catastrophically once the tail drops
//! below `1e-16`, which happens for moderate `k`.

mod bounds;
mod regular;

pub use bounds::{
    bound_set, lower_bound_m, multi_gain_exact, multi_item_s, upper_bound_m, BoundSet,
};
pub use regular::{regular_counterexample_search, regular_gain, regular_loss, RegularCounterexample};

use serde::{Deserialize, Serialize};

use crate::distributions::{left_cdf, reserve_price, ValueDistribution};
use crate::numeric::{integrate_piecewise, NeumaierSum};
use crate::{Error, Result, ALPHA};

/// Absolute quadrature tolerance, per unit of reserve price.
const LOSS_QUAD_TOL: f64 = 1e-11;

/// Cdfs at the reserve below this make the conditional loss undefined.
const DEGENERATE_CDF: f64 = 1e-12;

/// Above this, the log tail is taken as `-ln(1-x)` minus the partial sum
/// because the series converges too slowly.
const SERIES_LIMIT: f64 = 0.99;

/// `sum_{i>k} x^i / i` divided by `x^k`, i.e. `sum_{j>=0} x^{j+1} / (k+1+j)`.
fn scaled_log_tail(x: f64, k: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x <= SERIES_LIMIT {
        let mut sum = NeumaierSum::default();
        let mut pow = x;
        let mut j = 0u64;
        loop {
            let term = pow / (k as u64 + 1 + j) as f64;
            sum.add(term);
            if term <= 1e-18 * sum.total() {
                break;
            }
            pow *= x;
            j += 1;
        }
        sum.total()
    } else {
        let mut partial: NeumaierSum = (1..=k).map(|i| x.powi(i as i32) / i as f64).collect();
        partial.add((-x).ln_1p());
        -partial.total() / x.powi(k as i32)
    }
}

/// `sum_{i>k} x^i / i`.
pub fn log_tail(x: f64, k: u32) -> f64 {
    x.powi(k as i32) * scaled_log_tail(x, k)
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi <= ALPHA + 1e-12 {
        Ok(())
    } else {
        Err(Error::Domain(format!("phi must lie in (0, 1 - 1/e], got {phi}")))
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must lie in [0, 1), got {x}")))
    }
}

/// Cdf of the maximum of `k` i.i.d. draws.
pub fn order_stat_cdf<D: ValueDistribution + ?Sized>(dist: &D, k: u32, x: f64) -> f64 {
    dist.cdf(x).powi(k as i32)
}

/// Expected maximum of `k` bids conditioned on all of them being below the
/// reserve, by quadrature of `r - int_0^r (F(x) / F(r-))^k dx`.
///
/// Returns [`Error::DegenerateConditioning`] when `F(r-)` vanishes; the loss
/// is then taken as 0 by callers.
pub fn loss_numeric<D: ValueDistribution + ?Sized>(dist: &D, k: u32) -> Result<f64> {
    let r = reserve_price(dist)?;
    let phi = left_cdf(dist, r);
    if phi < DEGENERATE_CDF {
        return Err(Error::DegenerateConditioning { cdf_at_reserve: phi });
    }
    let integrand = |x: f64| {
        let f = if x < r { dist.cdf(x) } else { phi };
        (f / phi).min(1.0).powi(k as i32)
    };
    let mut breaks = dist.breakpoints();
    breaks.extend(dist.atoms().iter().map(|a| a.location));
    let area = integrate_piecewise(integrand, 0.0, r, &breaks, LOSS_QUAD_TOL * r.max(1.0));
    Ok((r - area).max(0.0))
}

/// Loss of the extremal distribution `G_{phi,r}`:
/// `r (phi^k + ln(1-phi) + sum_{i<=k} phi^i / i) / phi^k`.
pub fn loss_closed_form_g(phi: f64, r: f64, k: u32) -> Result<f64> {
    check_phi(phi)?;
    Ok(r * (1.0 - scaled_log_tail(phi, k)))
}

/// `(1 - phi^m) r`.
pub fn gain(phi: f64, r: f64, m: u32) -> f64 {
    (1.0 - phi.powi(m as i32)) * r
}

/// `Gain - Loss` for `G_{phi,r}`, equal to `-r q(phi) / phi^k`.
pub fn gain_minus_loss_g(phi: f64, r: f64, k: u32, m: u32) -> Result<f64> {
    check_phi(phi)?;
    Ok(r * (scaled_log_tail(phi, k) - phi.powi(m as i32)))
}

/// `q(x) = x^{k+m} + ln(1-x) + sum_{i<=k} x^i / i`.
pub fn q_poly(x: f64, k: u32, m: u32) -> Result<f64> {
    check_unit(x)?;
    Ok(x.powi((k + m) as i32) - log_tail(x, k))
}

/// `q'(x) = x^k / (1-x) * ((k+m) x^{m-1} (1-x) - 1)`.
pub fn q_prime(x: f64, k: u32, m: u32) -> Result<f64> {
    check_unit(x)?;
    let km = (k + m) as f64;
    if m == 0 {
        return Ok(km * x.powi(k as i32 - 1) - x.powi(k as i32) / (1.0 - x));
    }
    Ok(x.powi(k as i32) / (1.0 - x) * (km * x.powi(m as i32 - 1) * (1.0 - x) - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainLossReport {
    pub k: u32,
    pub m: u32,
    pub phi: f64,
    pub r: f64,
    pub gain: f64,
    pub loss: f64,
    /// `gain - loss`, from the cancellation-free closed form.
    pub diff: f64,
}

/// Gain and Loss of `G_{phi,r}` for `k` original and `m` extra bidders.
pub fn gain_loss_report(phi: f64, r: f64, k: u32, m: u32) -> Result<GainLossReport> {
    Ok(GainLossReport {
        k,
        m,
        phi,
        r,
        gain: gain(phi, r, m),
        loss: loss_closed_form_g(phi, r, k)?,
        diff: gain_minus_loss_g(phi, r, k, m)?,
    })
}
