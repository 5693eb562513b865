//! Warped-product Cauchy slabs `[t_min, t_max] × S`, `S` a circle or a flat
//! 2-torus, with metric `−dt² + f(t)²·(flat spatial metric)`.

mod geodesic;
mod grid;

pub use geodesic::{
    exp_inverse, exp_map, geodesic_shoot, geodesic_shoot_with, integrate_variational, GeodesicPath,
    ShootOptions, Variational,
};
pub use grid::{grid_build, BoundarySide, Grid};

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Closed flat spatial factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpatialFactor<T> {
    Circle { circumference: T },
    Torus { l1: T, l2: T },
}

impl<T: Real> SpatialFactor<T> {
    pub fn dims(&self) -> usize {
        match self {
            SpatialFactor::Circle { .. } => 1,
            SpatialFactor::Torus { .. } => 2,
        }
    }

    /// Circumferences per axis; unused axes report zero.
    pub fn lengths(&self) -> [T; 2] {
        match *self {
            SpatialFactor::Circle { circumference } => [circumference, T::zero()],
            SpatialFactor::Torus { l1, l2 } => [l1, l2],
        }
    }

    /// Coordinate volume (length or area) of the spatial factor.
    pub fn measure(&self) -> T {
        match *self {
            SpatialFactor::Circle { circumference } => circumference,
            SpatialFactor::Torus { l1, l2 } => l1 * l2,
        }
    }
}

/// Warp factor `f(t)` as a polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Warp<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Warp<T> {
    pub fn constant(c: T) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn polynomial(coeffs: Vec<T>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && *coeffs.last().unwrap() == T::zero() {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// `k`-th derivative at `t` (Horner on the differentiated coefficients).
    pub fn derivative(&self, t: T, k: usize) -> T {
        let n = self.coeffs.len();
        if k >= n {
            return T::zero();
        }
        let mut acc = T::zero();
        for i in (k..n).rev() {
            let mut fall = T::one();
            for j in 0..k {
                fall = fall * T::of_usize(i - j);
            }
            acc = acc * t + self.coeffs[i] * fall;
        }
        acc
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        self.derivative(t, 0)
    }

    /// `f, f', f''` at `t`.
    #[inline]
    pub fn jet(&self, t: T) -> (T, T, T) {
        if self.is_constant() {
            (self.coeffs[0], T::zero(), T::zero())
        } else {
            (self.derivative(t, 0), self.derivative(t, 1), self.derivative(t, 2))
        }
    }

    /// Exact `∫_a^b f(t)^power dt` via polynomial expansion.
    pub fn integral_of_power(&self, power: usize, a: T, b: T) -> T {
        let mut poly = vec![T::one()];
        for _ in 0..power {
            let mut next = vec![T::zero(); poly.len() + self.coeffs.len() - 1];
            for (i, &p) in poly.iter().enumerate() {
                for (j, &c) in self.coeffs.iter().enumerate() {
                    next[i + j] = next[i + j] + p * c;
                }
            }
            poly = next;
        }
        let anti = |t: T| {
            let mut acc = T::zero();
            for (i, &c) in poly.iter().enumerate().rev() {
                acc = acc * t + c / T::of_usize(i + 1);
            }
            acc * t
        };
        anti(b) - anti(a)
    }

    /// Minimum of `f` on `[a, b]`, by dense sampling plus endpoints.
    pub fn min_on(&self, a: T, b: T) -> T {
        if self.is_constant() {
            return self.coeffs[0];
        }
        let n = 2048;
        (0..=n)
            .map(|i| self.eval(a + (b - a) * T::of_usize(i) / T::of_usize(n)))
            .fold(T::infinity(), T::min)
    }

    pub fn max_on(&self, a: T, b: T) -> T {
        if self.is_constant() {
            return self.coeffs[0];
        }
        let n = 2048;
        (0..=n)
            .map(|i| self.eval(a + (b - a) * T::of_usize(i) / T::of_usize(n)))
            .fold(T::neg_infinity(), T::max)
    }

    /// Conformal time `∫_a^b dt / f(t)` (signed).
    pub fn conformal_time(&self, a: T, b: T) -> T {
        if self.is_constant() {
            return (b - a) / self.coeffs[0];
        }
        gauss_legendre_composite(a, b, 16, |t| T::one() / self.eval(t))
    }
}

/// Five-point Gauss–Legendre rule on `panels` equal subintervals.
pub(crate) fn gauss_legendre_composite<T: Real>(a: T, b: T, panels: usize, f: impl Fn(T) -> T) -> T {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let h = (b - a) / T::of_usize(panels);
    let mut total = T::zero();
    for p in 0..panels {
        let lo = a + h * T::of_usize(p);
        let mid = lo + h * T::half();
        let mut acc = T::zero();
        for k in 0..5 {
            acc = acc + T::of(W[k]) * f(mid + h * T::half() * T::of(X[k]));
        }
        total = total + acc * h * T::half();
    }
    total
}

/// A Cauchy slab: warped product over `[t_min, t_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeSpec<T> {
    pub t_min: T,
    pub t_max: T,
    pub spatial: SpatialFactor<T>,
    pub warp: Warp<T>,
}

impl<T: Real> SpacetimeSpec<T> {
    pub fn new(t_min: T, t_max: T, spatial: SpatialFactor<T>, warp: Warp<T>) -> Result<Self> {
        if !(t_min < t_max) {
            return Err(Error::InvalidSpacetime(format!("t_min {t_min} must be below t_max {t_max}")));
        }
        for (axis, &l) in spatial.lengths().iter().enumerate().take(spatial.dims()) {
            if !(l > T::zero()) || !l.is_finite() {
                return Err(Error::InvalidSpacetime(format!("circumference {axis} must be positive, got {l}")));
            }
        }
        let fmin = warp.min_on(t_min, t_max);
        if !(fmin > T::zero()) {
            return Err(Error::InvalidSpacetime(format!("warp factor must stay positive, minimum {fmin}")));
        }
        Ok(Self { t_min, t_max, spatial, warp })
    }

    /// Flat slab `[t_min, t_max] × S¹(L)` with `f ≡ 1`.
    pub fn flat_circle(t_min: T, t_max: T, circumference: T) -> Result<Self> {
        Self::new(t_min, t_max, SpatialFactor::Circle { circumference }, Warp::constant(T::one()))
    }

    /// Spacetime dimension including time.
    pub fn dimension(&self) -> usize {
        self.spatial.dims() + 1
    }

    pub fn spatial_dims(&self) -> usize {
        self.spatial.dims()
    }

    pub fn has_constant_warp(&self) -> bool {
        self.warp.is_constant()
    }

    pub fn height(&self) -> T {
        self.t_max - self.t_min
    }

    pub fn f_min(&self) -> T {
        self.warp.min_on(self.t_min, self.t_max)
    }

    /// Total spacetime volume `L·∫ f^{n−1} dt`.
    pub fn analytic_volume(&self) -> T {
        self.spatial.measure() * self.warp.integral_of_power(self.spatial_dims(), self.t_min, self.t_max)
    }

    /// Builds a point, canonicalizing spatial coordinates into `[0, L)`.
    pub fn point(&self, t: T, s: &[T]) -> Result<Point<T>> {
        if s.len() != self.spatial_dims() {
            return Err(Error::InvalidSpacetime(format!(
                "expected {} spatial coordinates, got {}",
                self.spatial_dims(),
                s.len()
            )));
        }
        if t < self.t_min || t > self.t_max || !t.is_finite() {
            return Err(Error::OutOfRange(format!("t = {t} outside [{}, {}]", self.t_min, self.t_max)));
        }
        let mut coords = [T::zero(); 2];
        coords[..s.len()].copy_from_slice(s);
        Ok(self.canonical(t, coords))
    }

    /// Same as [`point`](Self::point) for 2D slabs, panicking on bad input.
    pub fn pt(&self, t: T, s: T) -> Point<T> {
        self.point(t, &[s]).expect("point outside slab")
    }

    pub(crate) fn canonical(&self, t: T, s: [T; 2]) -> Point<T> {
        let lengths = self.spatial.lengths();
        let mut out = [T::zero(); 2];
        for k in 0..self.spatial_dims() {
            out[k] = wrap(s[k], lengths[k]);
        }
        Point { t, s: out }
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        p.t >= self.t_min && p.t <= self.t_max
    }

    /// Coordinate displacement `y − x` in space, choosing the winding with
    /// the smallest flat length.
    pub fn min_displacement(&self, x: &Point<T>, y: &Point<T>) -> [T; 2] {
        let lengths = self.spatial.lengths();
        let mut d = [T::zero(); 2];
        for k in 0..self.spatial_dims() {
            d[k] = centered(y.s[k] - x.s[k], lengths[k]);
        }
        d
    }

    /// Flat coordinate distance between the spatial projections.
    pub fn spatial_distance(&self, x: &Point<T>, y: &Point<T>) -> T {
        let d = self.min_displacement(x, y);
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }

    /// `g(u, v)` for raw components `(v_t, v_s1, v_s2)` at time `t`.
    #[inline]
    pub fn metric(&self, t: T, u: &[T; 3], v: &[T; 3]) -> T {
        let f = self.warp.eval(t);
        -u[0] * v[0] + f * f * (u[1] * v[1] + u[2] * v[2])
    }

    /// Christoffel-based geodesic acceleration at `(t, velocity)`.
    #[inline]
    pub(crate) fn acceleration(&self, t: T, v: &[T; 3]) -> [T; 3] {
        if self.warp.is_constant() {
            return [T::zero(); 3];
        }
        let (f, df, _) = self.warp.jet(t);
        let ss = v[1] * v[1] + v[2] * v[2];
        let h = df / f;
        [-f * df * ss, -T::two() * h * v[0] * v[1], -T::two() * h * v[0] * v[2]]
    }

    /// Christoffel symbols contracted as `Γ^a_{bc} u^b w^c`.
    pub fn christoffel_contract(&self, t: T, u: &[T; 3], w: &[T; 3]) -> [T; 3] {
        if self.warp.is_constant() {
            return [T::zero(); 3];
        }
        let (f, df, _) = self.warp.jet(t);
        let h = df / f;
        [
            f * df * (u[1] * w[1] + u[2] * w[2]),
            h * (u[0] * w[1] + u[1] * w[0]),
            h * (u[0] * w[2] + u[2] * w[0]),
        ]
    }
}

#[inline]
pub(crate) fn wrap<T: Real>(x: T, l: T) -> T {
    let r = x - l * (x / l).floor();
    if r >= l || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

#[inline]
pub(crate) fn centered<T: Real>(d: T, l: T) -> T {
    let r = d - l * (d / l).round();
    // round() ties away from zero; keep (−L/2, L/2]
    if r <= -l * T::half() {
        r + l
    } else {
        r
    }
}

/// A point of the slab; spatial coordinates live in `[0, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub t: T,
    pub s: [T; 2],
}

/// A tangent vector with components `(v_t, v_s1, v_s2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tangent<T> {
    pub base: Point<T>,
    pub v: [T; 3],
}

impl<T: Real> Tangent<T> {
    pub fn new(base: Point<T>, v: [T; 3]) -> Self {
        Self { base, v }
    }

    /// 2D convenience constructor.
    pub fn ts(base: Point<T>, vt: T, vs: T) -> Self {
        Self { base, v: [vt, vs, T::zero()] }
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|c| *c == T::zero())
    }
}

/// `g(u, v)` at `p`.
pub fn metric_eval<T: Real>(spec: &SpacetimeSpec<T>, p: &Point<T>, u: &Tangent<T>, v: &Tangent<T>) -> Result<T> {
    if u.base != *p || v.base != *p {
        return Err(Error::BaseMismatch);
    }
    Ok(spec.metric(p.t, &u.v, &v.v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalCharacter {
    Timelike,
    Null,
    Spacelike,
    Zero,
}

pub fn causal_character<T: Real>(spec: &SpacetimeSpec<T>, p: &Point<T>, v: &Tangent<T>) -> Result<CausalCharacter> {
    if v.base != *p {
        return Err(Error::BaseMismatch);
    }
    Ok(classify(spec.metric(p.t, &v.v, &v.v), v.is_zero()))
}

pub(crate) fn classify<T: Real>(gvv: T, is_zero: bool) -> CausalCharacter {
    if is_zero {
        CausalCharacter::Zero
    } else if gvv.abs() < T::null_tolerance() {
        CausalCharacter::Null
    } else if gvv < T::zero() {
        CausalCharacter::Timelike
    } else {
        CausalCharacter::Spacelike
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat() -> SpacetimeSpec<f64> {
        SpacetimeSpec::flat_circle(-1.0, 1.0, 4.0).unwrap()
    }

    #[test]
    fn metric_unit_vectors() {
        let spec = flat();
        let p = spec.pt(0.0, 0.0);
        let e_t = Tangent::ts(p, 1.0, 0.0);
        let e_s = Tangent::ts(p, 0.0, 1.0);
        assert_eq!(metric_eval(&spec, &p, &e_t, &e_t).unwrap(), -1.0);
        assert_eq!(metric_eval(&spec, &p, &e_s, &e_s).unwrap(), 1.0);
    }

    #[test]
    fn metric_with_quadratic_warp() {
        let spec: SpacetimeSpec<f64> =
            SpacetimeSpec::new(-1.0, 1.0, SpatialFactor::Circle { circumference: 4.0 }, Warp::polynomial(vec![1.0, 0.0, 1.0]))
                .unwrap();
        let p = spec.pt(1.0, 0.0);
        let e_s = Tangent::ts(p, 0.0, 1.0);
        assert!((metric_eval(&spec, &p, &e_s, &e_s).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_bases_rejected() {
        let spec = flat();
        let p = spec.pt(0.0, 0.0);
        let q = spec.pt(0.1, 0.0);
        let u = Tangent::ts(p, 1.0, 0.0);
        let v = Tangent::ts(q, 1.0, 0.0);
        assert!(matches!(metric_eval(&spec, &p, &u, &v), Err(Error::BaseMismatch)));
    }

    #[test]
    fn causal_characters() {
        let spec = flat();
        let p = spec.pt(0.0, 0.0);
        let c = |vt, vs| causal_character(&spec, &p, &Tangent::ts(p, vt, vs)).unwrap();
        assert_eq!(c(1.0, 0.0), CausalCharacter::Timelike);
        assert_eq!(c(1.0, 1.0), CausalCharacter::Null);
        assert_eq!(c(1.0, 2.0), CausalCharacter::Spacelike);
        assert_eq!(c(0.0, 0.0), CausalCharacter::Zero);
    }

    #[test]
    fn invalid_specs() {
        assert!(SpacetimeSpec::flat_circle(1.0, 1.0, 4.0).is_err());
        assert!(SpacetimeSpec::flat_circle(0.0, 1.0, 0.0).is_err());
        let bad = SpacetimeSpec::new(-1.0, 1.0, SpatialFactor::Circle { circumference: 1.0 }, Warp::polynomial(vec![0.5, 1.0]));
        assert!(bad.is_err());
    }

    #[test]
    fn winding_is_canonical() {
        let spec = flat();
        let p = spec.point(0.0, &[-0.5]).unwrap();
        assert_eq!(p.s[0], 3.5);
        let q = spec.point(0.0, &[8.25]).unwrap();
        assert_eq!(q.s[0], 0.25);
        assert!((spec.spatial_distance(&p, &q) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn warp_derivatives_and_integrals() {
        let w = Warp::<f64>::polynomial(vec![1.0, 0.0, 1.0]);
        assert_eq!(w.jet(1.0), (2.0, 2.0, 2.0));
        // ∫_0^1 (1+t²)² = 1 + 2/3 + 1/5
        assert!((w.integral_of_power(2, 0.0, 1.0) - (1.0 + 2.0 / 3.0 + 0.2)).abs() < 1e-14);
        // ∫_0^1 dt/(1+t²) = π/4
        assert!((w.conformal_time(0.0, 1.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn metric_symmetric_bilinear(
            t in -1.0f64..1.0,
            u in prop::array::uniform3(-3.0f64..3.0),
            v in prop::array::uniform3(-3.0f64..3.0),
            w in prop::array::uniform3(-3.0f64..3.0),
            a in -2.0f64..2.0,
        ) {
            let spec = SpacetimeSpec::new(
                -1.0, 1.0,
                SpatialFactor::Torus { l1: 2.0, l2: 3.0 },
                Warp::polynomial(vec![1.0, 0.2, 0.5]),
            ).unwrap();
            let g = |x: &[f64; 3], y: &[f64; 3]| spec.metric(t, x, y);
            prop_assert_eq!(g(&u, &v), g(&v, &u));
            let lin = [u[0] + a * w[0], u[1] + a * w[1], u[2] + a * w[2]];
            let lhs = g(&lin, &v);
            let rhs = g(&u, &v) + a * g(&w, &v);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn canonical_coordinates_in_range(s in -100.0f64..100.0) {
            let spec = flat();
            let p = spec.point(0.0, &[s]).unwrap();
            prop_assert!(p.s[0] >= 0.0 && p.s[0] < 4.0);
        }
    }
}
