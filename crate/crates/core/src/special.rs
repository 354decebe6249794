//! Scalar special functions and their interval ranges.

use std::f64::consts::PI;

use crate::interval::Interval;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Gamma function; `None` at the poles (nonpositive integers).
pub fn gamma(x: f64) -> Option<f64> {
    if x <= 0.0 && x == x.floor() {
        return None;
    }
    Some(libm::tgamma(x))
}

/// Digamma for any non-pole argument.
pub fn digamma(x: f64) -> f64 {
    if x <= 0.0 {
        // Reflection: psi(1 - x) - psi(x) = pi cot(pi x).
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 8.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    // Asymptotic series with Bernoulli coefficients.
    let series = r * (1.0 / 12.0 - r * (1.0 / 120.0 - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r / 132.0))));
    acc + x.ln() - 0.5 / x - series
}

/// Range of gamma over an interval without poles.
pub fn gamma_range(x: Interval) -> Option<Interval> {
    if x.hi >= 0.0 && x.lo <= 0.0 {
        return None;
    }
    if x.hi < 0.0 && x.lo.floor() != x.hi.floor() {
        return None;
    }
    if x.hi < 0.0 && (x.hi == x.hi.floor() || x.lo == x.lo.floor()) {
        return None;
    }
    let (ga, gb) = (gamma(x.lo)?, gamma(x.hi)?);
    let sign = if ga < 0.0 { -1.0 } else { 1.0 };
    let (aa, ab) = (ga.abs(), gb.abs());
    // |gamma| is unimodal on each pole-free cell with its minimum where digamma vanishes.
    let min_abs = if digamma(x.lo) >= 0.0 {
        aa
    } else if digamma(x.hi) <= 0.0 {
        ab
    } else {
        let (mut a, mut b) = (x.lo, x.hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if digamma(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        gamma(a)?.abs().min(gamma(b)?.abs())
    };
    let max_abs = aa.max(ab);
    Some(if sign > 0.0 { Interval::new(min_abs, max_abs) } else { Interval::new(-max_abs, -min_abs) })
}
