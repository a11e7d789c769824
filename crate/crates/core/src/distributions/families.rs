use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Atom, ValueDistribution};
use crate::{Error, Result, ALPHA};

/// Tolerance on `phi <= 1 - 1/e` when constructing a [`GFamily`]; values in
/// the slack band are clamped to `1 - 1/e`.
const PHI_SLACK: f64 = 1e-9;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be a positive finite number, got {v}")))
    }
}

/// Exponential distribution with the given rate. Constant hazard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        Ok(Exponential { rate: positive("rate", rate)? })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl ValueDistribution for Exponential {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn hazard(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            f64::INFINITY
        } else {
            -(-u).ln_1p() / self.rate
        }
    }

    fn support_hi(&self) -> f64 {
        f64::INFINITY
    }

    fn known_reserve(&self) -> Option<f64> {
        Some(1.0 / self.rate)
    }
}

/// Uniform distribution on `[lo, hi]` with `0 <= lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    lo: f64,
    hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidParameter(format!("uniform needs 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Uniform { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl ValueDistribution for Uniform {
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn density(&self, x: f64) -> f64 {
        if x >= self.lo && x < self.hi {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    fn hazard(&self, x: f64) -> f64 {
        if x < self.lo {
            0.0
        } else if x < self.hi {
            1.0 / (self.hi - x)
        } else {
            f64::INFINITY
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.lo + u.clamp(0.0, 1.0) * (self.hi - self.lo)
    }

    fn support_hi(&self) -> f64 {
        self.hi
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.lo]
    }

    /// `hi / 2` solves `x / (hi - x) = 1`; when `lo` is above it every
    /// virtual value in the support is positive and the reserve is `lo`.
    fn known_reserve(&self) -> Option<f64> {
        Some((0.5 * self.hi).max(self.lo))
    }
}

/// The extremal MHR distribution with reserve `r` and `cdf(r) = phi`.
///
/// Zero up to the knot `t = r (1 + ln(1 - phi))`, exponential with hazard
/// `1/r` on `[t, r]`, then a uniform slab of width `eps` carrying the
/// remaining `1 - phi` mass. Pointwise below every MHR cdf with the same
/// `(r, phi)` on `[0, r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFamily {
    phi: f64,
    r: f64,
    eps: f64,
    t_knot: f64,
}

impl GFamily {
    pub fn new(phi: f64, r: f64, eps: f64) -> Result<Self> {
        let r = positive("r", r)?;
        let eps = positive("eps", eps)?;
        if !(0.0..=ALPHA + PHI_SLACK).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 1 - 1/e], got {phi}"
            )));
        }
        let phi = phi.min(ALPHA);
        let t_knot = (r * (1.0 + (-phi).ln_1p())).clamp(0.0, r);
        Ok(GFamily { phi, r, eps, t_knot })
    }

    /// Slab width `1e-6 * r`.
    pub fn with_default_eps(phi: f64, r: f64) -> Result<Self> {
        Self::new(phi, r, 1e-6 * r)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn t_knot(&self) -> f64 {
        self.t_knot
    }
}

impl ValueDistribution for GFamily {
    fn cdf(&self, x: f64) -> f64 {
        let (t, r) = (self.t_knot, self.r);
        if x < t {
            0.0
        } else if x < r {
            -(-(x - t) / r).exp_m1()
        } else if x < r + self.eps {
            (self.phi + (1.0 - self.phi) * (x - r) / self.eps).min(1.0)
        } else {
            1.0
        }
    }

    fn density(&self, x: f64) -> f64 {
        let (t, r) = (self.t_knot, self.r);
        if x < t {
            0.0
        } else if x < r {
            (-(x - t) / r).exp() / r
        } else if x < r + self.eps {
            (1.0 - self.phi) / self.eps
        } else {
            0.0
        }
    }

    fn hazard(&self, x: f64) -> f64 {
        let (t, r) = (self.t_knot, self.r);
        if x < t {
            0.0
        } else if x < r {
            1.0 / r
        } else if x < r + self.eps {
            1.0 / (r + self.eps - x)
        } else {
            f64::INFINITY
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.t_knot
        } else if u < self.phi {
            (self.t_knot - self.r * (-u).ln_1p()).min(self.r)
        } else if u < 1.0 {
            self.r + self.eps * (u - self.phi) / (1.0 - self.phi)
        } else {
            self.r + self.eps
        }
    }

    fn support_hi(&self) -> f64 {
        self.r + self.eps
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.t_knot, self.r, self.r + self.eps]
    }

    fn known_reserve(&self) -> Option<f64> {
        Some(self.r)
    }
}

/// Regular but not MHR: `cdf(x) = 1 - eps / (x + eps)` on `[0, r)` with the
/// remaining mass `eps / (r + eps)` as an atom at `r`. The virtual value is
/// constant `-eps` below `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PFamily {
    eps: f64,
    r: f64,
}

impl PFamily {
    pub fn new(eps: f64, r: f64) -> Result<Self> {
        Ok(PFamily { eps: positive("eps", eps)?, r: positive("r", r)? })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn atom_mass(&self) -> f64 {
        self.eps / (self.r + self.eps)
    }
}

impl ValueDistribution for PFamily {
    fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x < self.r {
            x / (x + self.eps)
        } else {
            1.0
        }
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.r {
            0.0
        } else {
            self.eps / ((x + self.eps) * (x + self.eps))
        }
    }

    fn hazard(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x < self.r {
            1.0 / (x + self.eps)
        } else {
            f64::INFINITY
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u < self.r / (self.r + self.eps) {
            (self.eps * u / (1.0 - u)).min(self.r)
        } else {
            self.r
        }
    }

    fn support_hi(&self) -> f64 {
        self.r
    }

    fn atoms(&self) -> Vec<Atom> {
        vec![Atom { location: self.r, mass: self.atom_mass() }]
    }

    fn known_reserve(&self) -> Option<f64> {
        Some(self.r)
    }
}

/// Serializable description of one of the built-in families.
///
/// JSON form is a record tagged by `family`, e.g.
/// `{"family":"g","phi":0.5,"r":1.0,"eps":1e-6}`. The short string form
/// accepted by [`FromStr`] is `exponential:RATE`, `uniform:LO:HI`,
/// `g:PHI:R[:EPS]` or `p:EPS:R`; a string starting with `{` is parsed as JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionSpec {
    Exponential {
        rate: f64,
    },
    Uniform {
        #[serde(default)]
        lo: f64,
        hi: f64,
    },
    G {
        phi: f64,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    P {
        eps: f64,
        r: f64,
    },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<Box<dyn ValueDistribution>> {
        Ok(match *self {
            DistributionSpec::Exponential { rate } => Box::new(Exponential::new(rate)?),
            DistributionSpec::Uniform { lo, hi } => Box::new(Uniform::new(lo, hi)?),
            DistributionSpec::G { phi, r, eps: Some(eps) } => Box::new(GFamily::new(phi, r, eps)?),
            DistributionSpec::G { phi, r, eps: None } => Box::new(GFamily::with_default_eps(phi, r)?),
            DistributionSpec::P { eps, r } => Box::new(PFamily::new(eps, r)?),
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::G { .. } => "g",
            DistributionSpec::P { .. } => "p",
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s)
                .map_err(|e| Error::InvalidParameter(format!("distribution record: {e}")));
        }
        let mut parts = s.split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad number {p:?} in {s:?}")))
            })
            .collect::<Result<_>>()?;
        let wrong = || Error::InvalidParameter(format!("wrong number of parameters in {s:?}"));
        let spec = match (family.as_str(), nums.as_slice()) {
            ("exponential" | "exp", []) => DistributionSpec::Exponential { rate: 1.0 },
            ("exponential" | "exp", [rate]) => DistributionSpec::Exponential { rate: *rate },
            ("uniform", []) => DistributionSpec::Uniform { lo: 0.0, hi: 1.0 },
            ("uniform", [hi]) => DistributionSpec::Uniform { lo: 0.0, hi: *hi },
            ("uniform", [lo, hi]) => DistributionSpec::Uniform { lo: *lo, hi: *hi },
            ("g", [phi, r]) => DistributionSpec::G { phi: *phi, r: *r, eps: None },
            ("g", [phi, r, eps]) => DistributionSpec::G { phi: *phi, r: *r, eps: Some(*eps) },
            ("p", [eps, r]) => DistributionSpec::P { eps: *eps, r: *r },
            ("exponential" | "exp" | "uniform" | "g" | "p", _) => return Err(wrong()),
            _ => return Err(Error::InvalidParameter(format!("unknown family in {s:?}"))),
        };
        spec.build()?;
        Ok(spec)
    }
}
