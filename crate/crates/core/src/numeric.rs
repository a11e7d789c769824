//! Numerical primitives: adaptive Simpson quadrature, bracketed bisection and
//! compensated summation.

/// Recursion limit for [`adaptive_simpson`]; intervals are never split
/// below `(b - a) / 2^MAX_DEPTH`.
const MAX_DEPTH: u32 = 50;

#[inline]
fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The integrand should be smooth on the open interval; split at kinks with
/// [`integrate_piecewise`].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, a, b);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Integrates `f` over `[a, b]`, splitting at every breakpoint that falls
/// strictly inside the interval. The tolerance is shared evenly by the pieces.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut knots: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut edges = Vec::with_capacity(knots.len() + 2);
    edges.push(a);
    edges.extend(knots);
    edges.push(b);
    let piece_tol = tol / (edges.len() - 1) as f64;
    let mut sum = NeumaierSum::default();
    for w in edges.windows(2) {
        sum.add(adaptive_simpson(&f, w[0], w[1], piece_tol));
    }
    sum.total()
}

/// Bisection on a bracket `[lo, hi]` with `g(lo) < 0 <= g(hi)`, stopping once
/// the bracket is narrower than `width`. Returns the midpoint of the final
/// bracket.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    for _ in 0..2048 {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let q = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((q - 0.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_exponential() {
        let q = adaptive_simpson(|x: f64| (-x).exp(), 0.0, 5.0, 1e-12);
        assert!((q - (1.0 - (-5.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn piecewise_handles_kink() {
        let f = |x: f64| (x - 0.3).abs();
        let q = integrate_piecewise(f, 0.0, 1.0, &[0.3, 5.0, -1.0], 1e-12);
        let exact = 0.5 * 0.09 + 0.5 * 0.49;
        assert!((q - exact).abs() < 1e-12);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(|_| 1.0, 1.0, 1.0, 1e-10), 0.0);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.total(), 2.0);
    }
}
