//! Closed real intervals over any `Float`.
//!
//! Endpoints are plain floats without directed rounding; callers that need
//! validity margins apply them on top.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Float, FloatConst};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T = f64> {
    pub lo: T,
    pub hi: T,
}

impl<T: Float + FloatConst> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        debug_assert!(!(lo > hi), "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(v: T) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn entire() -> Self {
        Interval { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        let two = T::one() + T::one();
        self.lo + (self.hi - self.lo) / two
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(T::zero())
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn is_nonneg(&self) -> bool {
        self.lo >= T::zero()
    }

    pub fn is_nonpos(&self) -> bool {
        self.hi <= T::zero()
    }

    pub fn has_nan(&self) -> bool {
        self.lo.is_nan() || self.hi.is_nan()
    }

    /// `1/x`, or `None` when the interval contains zero.
    pub fn recip(&self) -> Option<Self> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.recip().map(|r| *self * r)
    }

    pub fn abs(&self) -> Self {
        if self.lo >= T::zero() {
            *self
        } else if self.hi <= T::zero() {
            -*self
        } else {
            Interval { lo: T::zero(), hi: (-self.lo).max(self.hi) }
        }
    }

    pub fn sqr(&self) -> Self {
        self.powi(2).expect("even power is total")
    }

    /// Integer power; `None` for a negative exponent over an interval containing zero.
    pub fn powi(&self, k: i32) -> Option<Self> {
        if k == 0 {
            return Some(Interval::point(T::one()));
        }
        if k < 0 {
            return self.powi(-k)?.recip();
        }
        let (a, b) = (self.lo.powi(k), self.hi.powi(k));
        Some(if k % 2 == 1 {
            Interval { lo: a, hi: b }
        } else if self.lo >= T::zero() {
            Interval { lo: a, hi: b }
        } else if self.hi <= T::zero() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: T::zero(), hi: a.max(b) }
        })
    }

    /// Real power with a non-integer exponent; requires a nonnegative base
    /// (strictly positive for negative exponents).
    pub fn powf(&self, p: T) -> Option<Self> {
        if self.lo < T::zero() || (p < T::zero() && self.lo <= T::zero()) {
            return None;
        }
        let (a, b) = (self.lo.powf(p), self.hi.powf(p));
        Some(if p >= T::zero() { Interval { lo: a, hi: b } } else { Interval { lo: b, hi: a } })
    }

    pub fn exp(&self) -> Self {
        Interval { lo: self.lo.exp(), hi: self.hi.exp() }
    }

    pub fn ln(&self) -> Option<Self> {
        (self.lo > T::zero()).then(|| Interval { lo: self.lo.ln(), hi: self.hi.ln() })
    }

    pub fn sqrt(&self) -> Option<Self> {
        (self.lo >= T::zero()).then(|| Interval { lo: self.lo.sqrt(), hi: self.hi.sqrt() })
    }

    pub fn atan(&self) -> Self {
        Interval { lo: self.lo.atan(), hi: self.hi.atan() }
    }

    pub fn tanh(&self) -> Self {
        Interval { lo: self.lo.tanh(), hi: self.hi.tanh() }
    }

    pub fn floor(&self) -> Self {
        Interval { lo: self.lo.floor(), hi: self.hi.floor() }
    }

    /// True when `phase + k·period` lies in the interval for some integer `k`.
    fn hits(&self, phase: T, period: T) -> bool {
        let k = ((self.lo - phase) / period).ceil();
        phase + k * period <= self.hi
    }

    pub fn sin(&self) -> Self {
        let one = T::one();
        let tau = T::TAU();
        if !(self.width() < tau) {
            return Interval { lo: -one, hi: one };
        }
        let (a, b) = (self.lo.sin(), self.hi.sin());
        let hi = if self.hits(T::FRAC_PI_2(), tau) { one } else { a.max(b) };
        let lo = if self.hits(-T::FRAC_PI_2(), tau) { -one } else { a.min(b) };
        Interval { lo, hi }
    }

    pub fn cos(&self) -> Self {
        let one = T::one();
        let tau = T::TAU();
        if !(self.width() < tau) {
            return Interval { lo: -one, hi: one };
        }
        let (a, b) = (self.lo.cos(), self.hi.cos());
        let hi = if self.hits(T::zero(), tau) { one } else { a.max(b) };
        let lo = if self.hits(T::PI(), tau) { -one } else { a.min(b) };
        Interval { lo, hi }
    }

    /// `None` when a pole lies in the interval.
    pub fn tan(&self) -> Option<Self> {
        if !(self.width() < T::PI()) || self.hits(T::FRAC_PI_2(), T::PI()) {
            return None;
        }
        Some(Interval { lo: self.lo.tan(), hi: self.hi.tan() })
    }
}

/// Product of two interval endpoints with `0 * inf = 0`.
fn emul<T: Float>(a: T, b: T) -> T {
    if a == T::zero() || b == T::zero() {
        T::zero()
    } else {
        a * b
    }
}

impl<T: Float + FloatConst> Add for Interval<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl<T: Float + FloatConst> Sub for Interval<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }
}

impl<T: Float + FloatConst> Neg for Interval<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl<T: Float + FloatConst> Mul for Interval<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let c = [emul(self.lo, o.lo), emul(self.lo, o.hi), emul(self.hi, o.lo), emul(self.hi, o.hi)];
        let lo = c.iter().copied().fold(T::infinity(), T::min);
        let hi = c.iter().copied().fold(T::neg_infinity(), T::max);
        Interval { lo, hi }
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type I = Interval<f64>;

    #[test]
    fn arithmetic() {
        let a = I::new(-1.0, 2.0);
        let b = I::new(3.0, 4.0);
        assert_eq!(a + b, I::new(2.0, 6.0));
        assert_eq!(a - b, I::new(-5.0, -1.0));
        assert_eq!(a * b, I::new(-4.0, 8.0));
        assert_eq!(a.div(&b).unwrap(), I::new(-1.0 / 3.0, 2.0 / 3.0));
        assert!(b.div(&a).is_none());
    }

    #[test]
    fn even_power_splits_on_sign() {
        assert_eq!(I::new(-1.0, 2.0).powi(2).unwrap(), I::new(0.0, 4.0));
        assert_eq!(I::new(-3.0, -1.0).powi(2).unwrap(), I::new(1.0, 9.0));
        assert_eq!(I::new(-2.0, 1.0).powi(3).unwrap(), I::new(-8.0, 1.0));
        assert!(I::new(-1.0, 1.0).powi(-1).is_none());
    }

    #[test]
    fn trig_extrema() {
        let s = I::new(0.0, 2.0 * PI).sin();
        assert_eq!((s.lo, s.hi), (-1.0, 1.0));
        let s = I::new(0.1, 1.0).sin();
        assert!((s.lo - 0.1f64.sin()).abs() < 1e-15 && (s.hi - 1.0f64.sin()).abs() < 1e-15);
        let c = I::new(3.0, 3.5).cos();
        assert_eq!(c.lo, -1.0);
        assert!(I::new(1.0, 2.0).tan().is_none());
        assert!(I::new(-1.0, 1.0).tan().is_some());
    }

    #[test]
    fn infinite_products_treat_zero_as_absorbing() {
        let a = I::new(0.0, 0.0);
        let b = I::new(f64::NEG_INFINITY, f64::INFINITY);
        assert_eq!(a * b, I::new(0.0, 0.0));
    }

    #[test]
    fn generic_over_f32() {
        let a = Interval::<f32>::new(1.0, 2.0);
        assert_eq!(a.sqr(), Interval::new(1.0, 4.0));
    }
}
