//! Scalar abstraction. Every numerical routine in the crate is generic over
//! [`Real`], which is implemented for `f32` and `f64`.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point scalar usable throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Threshold on `|g(v, v)|` below which a vector counts as null.
    fn null_tolerance() -> Self;

    /// Relative tolerance used when comparing a time separation to a
    /// spatial (or conformal) separation at the edge of a light cone.
    fn cone_tolerance() -> Self;

    /// Converts an `f64` literal. Panics only for values outside the range
    /// of `Self`, which never happens for the literals used in this crate.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("integer not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }
}

impl Real for f64 {
    fn null_tolerance() -> Self {
        1e-12
    }
    fn cone_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn null_tolerance() -> Self {
        1e-5
    }
    fn cone_tolerance() -> Self {
        1e-5
    }
}

/// Deterministic pairwise (tree) summation of `term(0) + … + term(n-1)`.
///
/// The reduction tree depends only on `n`, so results are bit-identical no
/// matter how the terms were produced.
pub fn pairwise_sum<T: Real>(n: usize, term: impl Fn(usize) -> T + Copy) -> T {
    fn rec<T: Real>(lo: usize, hi: usize, term: impl Fn(usize) -> T + Copy) -> T {
        const BLOCK: usize = 32;
        if hi - lo <= BLOCK {
            let mut acc = T::zero();
            for i in lo..hi {
                acc = acc + term(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, term) + rec(mid, hi, term)
        }
    }
    if n == 0 {
        T::zero()
    } else {
        rec(0, n, term)
    }
}

/// Pairwise summation of `K` simultaneous sums (same tree as
/// [`pairwise_sum`]).
pub fn pairwise_sum_array<T: Real, const K: usize>(n: usize, term: impl Fn(usize) -> [T; K] + Copy) -> [T; K] {
    fn rec<T: Real, const K: usize>(lo: usize, hi: usize, term: impl Fn(usize) -> [T; K] + Copy) -> [T; K] {
        const BLOCK: usize = 32;
        if hi - lo <= BLOCK {
            let mut acc = [T::zero(); K];
            for i in lo..hi {
                let t = term(i);
                for k in 0..K {
                    acc[k] = acc[k] + t[k];
                }
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            let (a, b) = (rec(lo, mid, term), rec(mid, hi, term));
            let mut out = a;
            for k in 0..K {
                out[k] = a[k] + b[k];
            }
            out
        }
    }
    if n == 0 {
        [T::zero(); K]
    } else {
        rec(0, n, term)
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_sum_slice<T: Real>(xs: &[T]) -> T {
    pairwise_sum(xs.len(), |i| xs[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let s: f64 = pairwise_sum(1000, |i| i as f64);
        assert_eq!(s, 499_500.0);
        assert_eq!(pairwise_sum::<f64>(0, |_| 1.0), 0.0);
    }

    #[test]
    fn pairwise_is_more_accurate_than_naive() {
        // 1e6 copies of 0.1 in f32: naive accumulation drifts visibly
        let n = 1_000_000;
        let pw: f32 = pairwise_sum(n, |_| 0.1f32);
        let mut naive = 0.0f32;
        for _ in 0..n {
            naive += 0.1;
        }
        let exact = 100_000.0f64;
        assert!((pw as f64 - exact).abs() < (naive as f64 - exact).abs());
        assert!((pw as f64 - exact).abs() / exact < 1e-5);
    }

    #[test]
    fn array_sum_matches_scalar_sums() {
        let s: [f64; 2] = pairwise_sum_array(777, |i| [i as f64, 1.0]);
        assert_eq!(s, [pairwise_sum(777, |i| i as f64), 777.0]);
    }

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f32 as Real>::of(0.25), 0.25f32);
        assert_eq!(<f64 as Real>::of_usize(7), 7.0);
        assert_eq!(<f64 as Real>::half().as_f64(), 0.5);
    }
}
