use super::{jacobi_solve, FSpec};
use crate::error::{Error, Result};
use crate::field::{l2_inner, Field};
use crate::linalg::Mat3;
use crate::lorentz::{relation, Direction, Relation};
use crate::scalar::{pairwise_sum, Real};
use crate::spacetime::{exp_inverse, Grid, Point, SpacetimeSpec, Tangent};
use rayon::prelude::*;

/// `w = exp_x⁻¹(y)` for a chronologically related node `y`, with `|w|` and
/// the time orientation of `y` relative to `x`.
#[derive(Clone, Copy, Debug)]
pub struct TimelikeChord<T> {
    pub w: [T; 3],
    pub len: T,
    pub future: bool,
}

impl<T: Real> TimelikeChord<T> {
    /// All chords from `x` to the grid nodes (`None` off `I(x)`).
    pub fn all(grid: &Grid<T>, x: &Point<T>) -> Result<Vec<Option<Self>>> {
        let spec = grid.spec();
        let one = |y: &Point<T>| -> Result<Option<Self>> {
            let dir = match relation(spec, x, y) {
                Relation::Chronological(d) => d,
                _ => return Ok(None),
            };
            let w = exp_inverse(spec, x, y)?;
            let len = (-spec.metric(x.t, &w, &w)).max(T::zero()).sqrt();
            if len == T::zero() {
                return Ok(None);
            }
            Ok(Some(Self { w, len, future: dir == Direction::Future }))
        };
        if spec.has_constant_warp() {
            grid.nodes().iter().map(one).collect()
        } else {
            grid.nodes().par_iter().map(one).collect()
        }
    }

    #[inline]
    fn sign(&self) -> T {
        if self.future {
            T::one()
        } else {
            -T::one()
        }
    }

    /// `σ_x(y) = ±|w|`.
    #[inline]
    pub fn sigma(&self) -> T {
        self.sign() * self.len
    }
}

fn require_smooth(fspec: FSpec) -> Result<()> {
    if fspec.is_smooth() {
        Ok(())
    } else {
        Err(Error::NonSmoothFunction(fspec.to_string()))
    }
}

/// `dΦ_x · v` as a field over the grid nodes.
pub fn dphi<T: Real>(grid: &Grid<T>, x: &Point<T>, v: &Tangent<T>, fspec: FSpec) -> Result<Field<T>> {
    require_smooth(fspec)?;
    if v.base != *x {
        return Err(Error::BaseMismatch);
    }
    let chords = TimelikeChord::all(grid, x)?;
    Ok(dphi_from(grid, x, &v.v, fspec, &chords))
}

fn dphi_from<T: Real>(grid: &Grid<T>, x: &Point<T>, v: &[T; 3], fspec: FSpec, chords: &[Option<TimelikeChord<T>>]) -> Field<T> {
    let spec = grid.spec();
    Field::new(
        chords
            .iter()
            .map(|c| match c {
                None => T::zero(),
                Some(c) => {
                    let dsigma = c.sign() * spec.metric(x.t, v, &c.w) / c.len;
                    fspec.derivative(c.sigma(), 1) * dsigma
                }
            })
            .collect(),
    )
}

/// `Hess_x Φ (v, v)` as a field: `f''(σ)(dσ·v)² + f'(σ)·Hess σ(v, v)`, with
/// `Hess σ(v,v) = ±g(K'(0), v⊥)/|w|` from the Jacobi field `K` along the
/// geodesic to `y` with `K(0) = v⊥`, `K(1) = 0`.
pub fn hessian<T: Real>(grid: &Grid<T>, x: &Point<T>, v: &Tangent<T>, fspec: FSpec) -> Result<Field<T>> {
    require_smooth(fspec)?;
    if v.base != *x {
        return Err(Error::BaseMismatch);
    }
    let spec = grid.spec();
    let chords = TimelikeChord::all(grid, x)?;
    let one = |c: &Option<TimelikeChord<T>>| -> Result<T> {
        match c {
            None => Ok(T::zero()),
            Some(c) => hessian_value(spec, x, &v.v, c, fspec),
        }
    };
    let values: Result<Vec<T>> = if spec.has_constant_warp() {
        chords.iter().map(one).collect()
    } else {
        chords.par_iter().map(one).collect()
    };
    Ok(Field::new(values?))
}

fn hessian_value<T: Real>(spec: &SpacetimeSpec<T>, x: &Point<T>, v: &[T; 3], c: &TimelikeChord<T>, fspec: FSpec) -> Result<T> {
    let g = |a: &[T; 3], b: &[T; 3]| spec.metric(x.t, a, b);
    let gvw = g(v, &c.w);
    let dsigma = c.sign() * gvw / c.len;
    // v⊥ = v + g(v, ŵ) ŵ, ŵ = w/|w| with g(ŵ, ŵ) = −1
    let coef = gvw / (c.len * c.len);
    let vperp = [v[0] + coef * c.w[0], v[1] + coef * c.w[1], v[2] + coef * c.w[2]];
    let kp = if spec.has_constant_warp() {
        [-vperp[0], -vperp[1], -vperp[2]]
    } else {
        jacobi_solve(spec, x, c.w, vperp)?.k_prime0
    };
    let hess_sigma = c.sign() * g(&kp, &vperp) / c.len;
    let s = c.sigma();
    Ok(fspec.derivative(s, 2) * dsigma * dsigma + fspec.derivative(s, 1) * hess_sigma)
}

/// Pullback metric `G_ab = ⟨dΦ·e_a, dΦ·e_b⟩` in the coordinate basis
/// `(∂_t, ∂_s…)`.
#[derive(Clone, Debug)]
pub struct MetricAtPoint<T> {
    pub base: Point<T>,
    pub g: Mat3<T>,
}

impl<T: Real> MetricAtPoint<T> {
    pub fn component(&self, a: usize, b: usize) -> T {
        self.g.a[a][b]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g.is_positive_definite()
    }
}

fn basis<T: Real>(n: usize) -> Vec<[T; 3]> {
    (0..n)
        .map(|a| {
            let mut e = [T::zero(); 3];
            e[a] = T::one();
            e
        })
        .collect()
}

/// Gram matrix of the `dΦ` fields of the coordinate basis.
pub fn pullback_metric<T: Real>(grid: &Grid<T>, x: &Point<T>, fspec: FSpec) -> Result<MetricAtPoint<T>> {
    require_smooth(fspec)?;
    let n = grid.spec().dimension();
    let chords = TimelikeChord::all(grid, x)?;
    let fields: Vec<Field<T>> = basis::<T>(n).iter().map(|e| dphi_from(grid, x, e, fspec, &chords)).collect();
    let mut g = Mat3::zeros(n);
    for a in 0..n {
        for b in a..n {
            let v = l2_inner(&fields[a], &fields[b], grid)?;
            g.a[a][b] = v;
            g.a[b][a] = v;
        }
    }
    Ok(MetricAtPoint { base: *x, g })
}

/// The same metric from the explicit integrand
/// `f'(±|w|)²·|w|⁻²·g(e_a, w)·g(e_b, w)`.
pub fn pullback_metric_integrand<T: Real>(grid: &Grid<T>, x: &Point<T>, fspec: FSpec) -> Result<MetricAtPoint<T>> {
    require_smooth(fspec)?;
    let spec = grid.spec();
    let n = spec.dimension();
    let chords = TimelikeChord::all(grid, x)?;
    let e = basis::<T>(n);
    let w = grid.weights();
    let mut g = Mat3::zeros(n);
    for a in 0..n {
        for b in a..n {
            let v = pairwise_sum(chords.len(), |i| match &chords[i] {
                None => T::zero(),
                Some(c) => {
                    let fp = fspec.derivative(c.sigma(), 1);
                    let ga = spec.metric(x.t, &e[a], &c.w);
                    let gb = spec.metric(x.t, &e[b], &c.w);
                    w[i] * ((fp * ga / c.len) * (fp * gb / c.len))
                }
            });
            g.a[a][b] = v;
            g.a[b][a] = v;
        }
    }
    Ok(MetricAtPoint { base: *x, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{grid_build, SpacetimeSpec};

    #[test]
    fn unit_tangential_derivative_flat() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = grid_build(&spec, 16, 32).unwrap();
        let x = spec.pt(0.0, 0.0);
        let y = g.nearest_node(&spec.pt(0.5, 0.3));
        let yp = g.node(y);
        let w = [yp.t, yp.s[0], 0.0];
        let len = (w[0] * w[0] - w[1] * w[1]).sqrt();
        let v = Tangent::new(x, [w[0] / len, w[1] / len, 0.0]);
        let d = dphi(&g, &x, &v, FSpec::H).unwrap();
        assert!((d.values[y] + 4.0 * len.powi(3)).abs() < 1e-12);
        let h = hessian(&g, &x, &v, FSpec::H).unwrap();
        assert!((h.values[y] - 12.0 * len * len).abs() < 1e-12);
        // unit spacelike orthogonal direction
        let u = Tangent::new(x, [w[1] / len, w[0] / len, 0.0]);
        assert!(spec.metric(0.0, &u.v, &w).abs() < 1e-15);
        let h = hessian(&g, &x, &u, FSpec::H).unwrap();
        assert!((h.values[y] + 4.0 * len * len).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_smooth() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = grid_build(&spec, 8, 8).unwrap();
        let x = spec.pt(0.0, 0.0);
        let v = Tangent::ts(x, 1.0, 0.0);
        assert!(matches!(dphi(&g, &x, &v, FSpec::Abs), Err(Error::NonSmoothFunction(_))));
        assert!(matches!(pullback_metric(&g, &x, FSpec::ChiPlus), Err(Error::NonSmoothFunction(_))));
    }

    #[test]
    fn flat_metric_symmetric_and_definite() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = grid_build(&spec, 32, 64).unwrap();
        let x = spec.pt(0.0, 0.0);
        let m = pullback_metric(&g, &x, FSpec::H).unwrap();
        assert!(m.component(0, 1).abs() < 1e-12);
        assert!(m.is_positive_definite());
        let m2 = pullback_metric_integrand(&g, &x, FSpec::H).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((m.component(a, b) - m2.component(a, b)).abs() <= 1e-12 * m.g.max_abs());
            }
        }
    }
}

#[cfg(test)]
mod warped_tests {
    use super::*;
    use crate::spacetime::{exp_map, SpacetimeSpec, SpatialFactor, Warp};

    fn sigma_geo(spec: &SpacetimeSpec<f64>, x: &Point<f64>, y: &Point<f64>) -> f64 {
        let w = exp_inverse(spec, x, y).unwrap();
        let len = (-spec.metric(x.t, &w, &w)).sqrt();
        len * (y.t - x.t).signum()
    }

    #[test]
    fn warped_derivatives_match_finite_differences() {
        let spec = SpacetimeSpec::new(
            -1.0,
            1.0,
            SpatialFactor::Circle { circumference: 4.0 },
            Warp::polynomial(vec![1.0, 0.2, 0.5]),
        )
        .unwrap();
        let g = crate::spacetime::grid_build(&spec, 8, 8).unwrap();
        let x = spec.pt(-0.1, 1.0);
        let ys = [spec.pt(0.6, 1.3), spec.pt(-0.9, 0.8), spec.pt(0.8, 0.5)];
        for v in [[1.0, 0.2, 0.0], [0.3, 1.0, 0.0], [0.5, -0.4, 0.0]] {
            let eps = 1e-3;
            let xp = exp_map(&spec, &x, &Tangent::new(x, [eps * v[0], eps * v[1], 0.0]), 400).unwrap();
            let xm = exp_map(&spec, &x, &Tangent::new(x, [-eps * v[0], -eps * v[1], 0.0]), 400).unwrap();
            for y in &ys {
                let f = |p: &Point<f64>| FSpec::H.eval(sigma_geo(&spec, p, y));
                let fd1 = (f(&xp) - f(&xm)) / (2.0 * eps);
                let fd2 = (f(&xp) - 2.0 * f(&x) + f(&xm)) / (eps * eps);
                let c = TimelikeChord { w: exp_inverse(&spec, &x, y).unwrap(), len: 0.0, future: y.t > x.t };
                let c = TimelikeChord { len: (-spec.metric(x.t, &c.w, &c.w)).sqrt(), ..c };
                let d1 = dphi_from(&g, &x, &v, FSpec::H, &[Some(c)]).values[0];
                let d2 = hessian_value(&spec, &x, &v, &c, FSpec::H).unwrap();
                assert!((fd1 - d1).abs() < 1e-5 * (1.0 + d1.abs()), "dphi {fd1} vs {d1}");
                assert!((fd2 - d2).abs() < 1e-4 * (1.0 + d2.abs()), "hess {fd2} vs {d2}");
            }
        }
    }
}
