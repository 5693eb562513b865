//! Double-word ("double-double") arithmetic: an unevaluated sum `hi + lo`
//! with `|lo| ≤ ulp(hi)/2`, giving roughly twice the working precision.

use crate::scalar::Real;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Ext<T> {
    pub hi: T,
    pub lo: T,
}

impl<T: Real> Ext<T> {
    pub fn new(x: T) -> Self {
        Self { hi: x, lo: T::zero() }
    }

    pub fn zero() -> Self {
        Self::new(T::zero())
    }

    /// Error-free `a + b`.
    #[inline]
    pub fn two_sum(a: T, b: T) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    #[inline]
    fn quick_two_sum(a: T, b: T) -> Self {
        let s = a + b;
        Self { hi: s, lo: b - (s - a) }
    }

    /// Error-free `a · b` (relies on a fused multiply-add).
    #[inline]
    pub fn two_prod(a: T, b: T) -> Self {
        let p = a * b;
        Self { hi: p, lo: a.mul_add(b, -p) }
    }

    /// Rounded to working precision.
    #[inline]
    pub fn value(self) -> T {
        self.hi + self.lo
    }

    /// Product with a working-precision scalar.
    #[inline]
    pub fn scale(self, k: T) -> Self {
        let p = Self::two_prod(self.hi, k);
        Self::quick_two_sum(p.hi, p.lo + self.lo * k)
    }
}

impl<T: Real> Add for Ext<T> {
    type Output = Self;

    #[inline]
    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let t = Self::two_sum(self.lo, o.lo);
        let hi = Self::quick_two_sum(s.hi, s.lo + t.hi);
        Self::quick_two_sum(hi.hi, hi.lo + t.lo)
    }
}

impl<T: Real> Neg for Ext<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl<T: Real> Sub for Ext<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Mul for Ext<T> {
    type Output = Self;

    #[inline]
    fn mul(self, o: Self) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        Self::quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_digits() {
        // (1 + 2⁻⁶⁰) − 1 is lost in f64 but kept in double-word
        let tiny = 2f64.powi(-60);
        let a = Ext::new(1.0) + Ext::new(tiny);
        let d = a - Ext::new(1.0);
        assert_eq!(d.value(), tiny);
        assert_eq!((1.0 + tiny) - 1.0, 0.0);
    }

    #[test]
    fn products_are_exact() {
        let x = 0.1f64;
        let p = Ext::two_prod(x, x);
        // hi + lo reproduces x² to double-word accuracy
        let back = p - Ext::two_prod(x, x);
        assert_eq!(back.value(), 0.0);
        let s = Ext::new(3.0f64).scale(1.0 / 3.0);
        assert!((s.value() - 1.0).abs() <= f64::EPSILON);
        let m = Ext::new(1.5f64) * Ext::new(2.0);
        assert_eq!(m.value(), 3.0);
    }
}
