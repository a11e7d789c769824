use serde::{Deserialize, Serialize};

use crate::{Error, Result, ALPHA};

/// `ln(1/alpha) = ln(e / (e - 1))`.
fn log_inv_alpha() -> f64 {
    -ALPHA.ln()
}

/// Extra bidders that always suffice for RMA(k+m) to match EMA(k):
/// `floor(log_{1/alpha}(2k)) + 2`.
pub fn upper_bound_m(k: u32) -> u32 {
    let k = k.max(1) as f64;
    ((2.0 * k).ln() / log_inv_alpha()).floor() as u32 + 2
}

/// Largest `m` that provably does not suffice on `G_{alpha,r}`:
/// `floor(log_{1/alpha}((k+1)(1-alpha))) + 1`, floored at 0.
pub fn lower_bound_m(k: u32) -> u32 {
    let v = ((k as f64 + 1.0) * (1.0 - ALPHA)).ln() / log_inv_alpha();
    (v.floor() + 1.0).max(0.0) as u32
}

/// Extra bidders beyond `m` for `t` items:
/// `ceil(t + (1 + eps) t ln m + ln t)`.
///
/// The `ln t` term is what the contribution bound actually needs; it only
/// ever makes the count larger.
pub fn multi_item_s(t: u32, m: u32, epsilon_slack: f64) -> Result<u32> {
    if t == 0 || m < 2 || !(epsilon_slack > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "multi_item_s needs t >= 1, m >= 2, eps > 0 (got t={t}, m={m}, eps={epsilon_slack})"
        )));
    }
    let t = t as f64;
    Ok((t + (1.0 + epsilon_slack) * t * (m as f64).ln() + t.ln()).ceil() as u32)
}

fn binomial(n: u32, j: u32) -> f64 {
    if j > n {
        return 0.0;
    }
    let j = j.min(n - j);
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact expected contribution of `m + s` extra bidders filling `t_res`
/// residual items at price floor `r`:
/// `r (t_res - sum_{j<t_res} a_j (t_res - j))` with
/// `a_j = C(m+s, j) phi^{m+s-j} (1-phi)^j`.
pub fn multi_gain_exact(phi: f64, r: f64, m: u32, s: u32, t_res: u32) -> Result<f64> {
    if !(0.0..=ALPHA + 1e-12).contains(&phi) {
        return Err(Error::Domain(format!("phi must lie in [0, 1 - 1/e], got {phi}")));
    }
    if t_res == 0 {
        return Err(Error::InvalidParameter("t_res must be at least 1".into()));
    }
    let n = m + s;
    let shortfall: f64 = (0..t_res)
        .map(|j| {
            let a = if j > n {
                0.0
            } else {
                binomial(n, j) * phi.powi((n - j) as i32) * (1.0 - phi).powi(j as i32)
            };
            a * (t_res - j) as f64
        })
        .sum();
    Ok(r * (t_res as f64 - shortfall))
}

/// The bidder-count bounds for `k` original bidders and `t` items.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub k: u32,
    pub t: u32,
    pub m_upper: u32,
    pub m_lower: u32,
    pub s_multi: u32,
    pub epsilon_slack: f64,
}

pub fn bound_set(k: u32, t: u32, epsilon_slack: f64) -> Result<BoundSet> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let m_upper = upper_bound_m(k);
    Ok(BoundSet {
        k,
        t,
        m_upper,
        m_lower: lower_bound_m(k),
        s_multi: multi_item_s(t, m_upper, epsilon_slack)?,
        epsilon_slack,
    })
}
