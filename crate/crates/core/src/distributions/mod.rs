//! Value distributions and the hazard-rate machinery.
//!
//! Every distribution is supported on `[0, support_hi]`. Cdfs are
//! right-continuous; point masses are reported through [`ValueDistribution::atoms`]
//! and the density only describes the continuous part.

mod families;

pub use families::{DistributionSpec, Exponential, GFamily, PFamily, Uniform};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::bisect;
use crate::{Error, Result};

/// Slack allowed when checking that a hazard rate or virtual value is
/// nondecreasing on a grid.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Truncation quantile for unbounded supports.
pub const TAIL_QUANTILE: f64 = 1.0 - 1e-12;

/// Points where `1 - cdf` is below this are excluded from hazard grids.
const SURVIVAL_FLOOR: f64 = 1e-12;

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// An evaluatable value distribution on `[0, support_hi]`.
pub trait ValueDistribution: fmt::Debug + Send + Sync {
    /// Right-continuous cdf.
    fn cdf(&self, x: f64) -> f64;

    /// Density of the continuous part.
    fn density(&self, x: f64) -> f64;

    /// Generalized inverse `inf { x : cdf(x) >= u }`.
    fn quantile(&self, u: f64) -> f64;

    /// Upper end of the support, possibly `f64::INFINITY`.
    fn support_hi(&self) -> f64;

    /// `density / (1 - cdf)`, `+inf` where the survival function vanishes.
    fn hazard(&self, x: f64) -> f64 {
        let survival = 1.0 - self.cdf(x);
        if survival <= 0.0 {
            f64::INFINITY
        } else {
            self.density(x) / survival
        }
    }

    fn atoms(&self) -> Vec<Atom> {
        Vec::new()
    }

    /// Points where the density is not smooth. Used to split quadrature.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Reserve price, when it is known in closed form.
    fn known_reserve(&self) -> Option<f64> {
        None
    }
}

impl<D: ValueDistribution + ?Sized> ValueDistribution for &D {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn density(&self, x: f64) -> f64 {
        (**self).density(x)
    }
    fn quantile(&self, u: f64) -> f64 {
        (**self).quantile(u)
    }
    fn support_hi(&self) -> f64 {
        (**self).support_hi()
    }
    fn hazard(&self, x: f64) -> f64 {
        (**self).hazard(x)
    }
    fn atoms(&self) -> Vec<Atom> {
        (**self).atoms()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn known_reserve(&self) -> Option<f64> {
        (**self).known_reserve()
    }
}

/// Left limit of the cdf, `P(X < x)`.
pub fn left_cdf<D: ValueDistribution + ?Sized>(dist: &D, x: f64) -> f64 {
    let at: f64 = dist.atoms().iter().filter(|a| a.location == x).map(|a| a.mass).sum();
    (dist.cdf(x) - at).max(0.0)
}

fn is_atom<D: ValueDistribution + ?Sized>(dist: &D, x: f64) -> bool {
    dist.atoms().iter().any(|a| a.location == x)
}

/// Upper end of the region used for grids and root brackets.
pub fn effective_upper<D: ValueDistribution + ?Sized>(dist: &D) -> f64 {
    let hi = dist.support_hi();
    if hi.is_finite() {
        hi
    } else {
        dist.quantile(TAIL_QUANTILE)
    }
}

/// Myerson reserve price: the `r` solving `r * hazard(r) = 1`.
///
/// Families with a closed-form reserve return it directly. Otherwise the
/// root of `x * hazard(x) - 1` is bracketed by geometric expansion from the
/// median and refined by bisection; hazard rates may have kinks, so no
/// derivative information is used.
pub fn reserve_price<D: ValueDistribution + ?Sized>(dist: &D) -> Result<f64> {
    if let Some(r) = dist.known_reserve() {
        return Ok(r);
    }
    let g = |x: f64| x * dist.hazard(x) - 1.0;
    let upper = effective_upper(dist);
    let mut start = dist.quantile(0.5);
    if !(start > 0.0) {
        start = upper.min(1.0) * 1e-3;
    }

    let (lo, hi) = if g(start) < 0.0 {
        let mut lo = start;
        let mut hi = start;
        loop {
            let next = (hi * 2.0).min(upper);
            if g(next) >= 0.0 {
                hi = next;
                break;
            }
            if next >= upper {
                return Err(Error::NoRoot { searched_to: upper });
            }
            lo = next;
            hi = next;
        }
        (lo, hi)
    } else {
        let hi = start;
        let mut lo = start;
        let mut found = false;
        for _ in 0..1100 {
            lo *= 0.5;
            if g(lo) < 0.0 {
                found = true;
                break;
            }
        }
        if !found {
            lo = 0.0;
        }
        (lo, hi)
    };
    Ok(bisect(g, lo, hi, 1e-12 * hi.max(1.0)))
}

/// Virtual valuation `x - 1 / hazard(x)`.
pub fn virtual_value<D: ValueDistribution + ?Sized>(dist: &D, x: f64) -> Result<f64> {
    let h = dist.hazard(x);
    if !(h > 0.0) {
        return Err(Error::Domain(format!("hazard is zero at x = {x}; virtual value is -inf")));
    }
    Ok(x - 1.0 / h)
}

/// Inverse-cdf sampling: maps a uniform `u` in `[0, 1)` to a value.
pub fn sample<D: ValueDistribution + ?Sized>(dist: &D, u: f64) -> f64 {
    dist.quantile(u)
}

/// Result of a grid-based monotonicity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhrReport {
    pub is_mhr: bool,
    /// `(x1, x2)` with `x1 < x2` and the checked function strictly larger at
    /// `x1`. Present iff the check failed.
    pub witness: Option<(f64, f64)>,
    pub grid_size: usize,
}

/// Quantile-spaced grid avoiding atoms and the far tail.
fn hazard_grid<D: ValueDistribution + ?Sized>(dist: &D, grid_size: usize) -> Vec<f64> {
    let n = grid_size.max(16);
    let hi = dist.support_hi();
    let mut xs: Vec<f64> = (0..n)
        .map(|i| dist.quantile((i as f64 + 0.5) / n as f64))
        .filter(|&x| x.is_finite() && x < hi && !is_atom(dist, x))
        .filter(|&x| 1.0 - dist.cdf(x) > SURVIVAL_FLOOR)
        .collect();
    xs.dedup();
    xs
}

fn monotone_report<F: Fn(f64) -> Option<f64>>(xs: &[f64], f: F, grid_size: usize) -> MhrReport {
    let vals: Vec<(f64, f64)> = xs.iter().filter_map(|&x| f(x).map(|v| (x, v))).collect();
    for w in vals.windows(2) {
        let (x1, v1) = w[0];
        let (x2, v2) = w[1];
        if v1 - v2 > MONOTONE_SLACK * v1.abs().max(1.0) {
            return MhrReport { is_mhr: false, witness: Some((x1, x2)), grid_size };
        }
    }
    MhrReport { is_mhr: true, witness: None, grid_size }
}

/// Checks that the hazard rate is nondecreasing on a quantile-spaced grid.
pub fn mhr_check<D: ValueDistribution + ?Sized>(dist: &D, grid_size: usize) -> MhrReport {
    let xs = hazard_grid(dist, grid_size);
    monotone_report(&xs, |x| Some(dist.hazard(x)), grid_size)
}

/// Checks that the virtual value is nondecreasing on the same grid as
/// [`mhr_check`]. Points with zero hazard (virtual value `-inf`) are skipped.
pub fn regularity_check<D: ValueDistribution + ?Sized>(dist: &D, grid_size: usize) -> MhrReport {
    let xs = hazard_grid(dist, grid_size);
    monotone_report(&xs, |x| virtual_value(dist, x).ok(), grid_size)
}

/// `cdf(reserve) <= 1 - 1/e`, which every MHR distribution satisfies.
pub fn lemma1_check<D: ValueDistribution + ?Sized>(dist: &D) -> Result<bool> {
    let r = reserve_price(dist)?;
    Ok(dist.cdf(r) <= crate::ALPHA + 1e-9)
}

/// Checks `cdf(y) >= G_{phi,r}(y)` on a uniform grid of `[0, r]`, where `r`
/// is the reserve of `dist` and `phi = cdf(r)`.
pub fn domination_check<D: ValueDistribution + ?Sized>(dist: &D, grid_size: usize) -> Result<bool> {
    let r = reserve_price(dist)?;
    let extremal = GFamily::with_default_eps(dist.cdf(r), r)?;
    let n = grid_size.max(2);
    Ok((0..n).all(|i| {
        let y = r * i as f64 / (n - 1) as f64;
        dist.cdf(y) >= extremal.cdf(y) - 1e-9
    }))
}
