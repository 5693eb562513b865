//! Geodesic integration (RK4) in universal-cover coordinates, with the
//! linearized flow used for shooting and Jacobi fields.

use super::{Point, SpacetimeSpec, Tangent};
use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct ShootOptions<T> {
    /// RK4 steps per unit of affine parameter.
    pub steps_per_unit: usize,
    /// Hard cap on the affine parameter (geodesics that never reach the
    /// boundary, e.g. spatial circles, stop here).
    pub max_param: T,
}

/// A sampled geodesic. `raw` holds unwrapped coordinates `(t, s1, s2)`.
#[derive(Clone, Debug)]
pub struct GeodesicPath<T> {
    pub params: Vec<T>,
    pub points: Vec<Point<T>>,
    pub raw: Vec<[T; 3]>,
    pub velocities: Vec<[T; 3]>,
    /// Whether the path stopped on `t = t_min` or `t = t_max`.
    pub hit_boundary: bool,
    /// Largest deviation of the spatial momentum `f(t)² ds/dλ` from its
    /// initial value.
    pub momentum_drift: T,
}

impl<T: Real> GeodesicPath<T> {
    pub fn end(&self) -> Point<T> {
        *self.points.last().expect("path has at least one point")
    }

    pub fn param_length(&self) -> T {
        *self.params.last().expect("path has at least one point")
    }
}

#[inline]
fn rk4_step<T: Real>(spec: &SpacetimeSpec<T>, x: &[T; 3], v: &[T; 3], h: T) -> ([T; 3], [T; 3]) {
    let add = |a: &[T; 3], b: &[T; 3], s: T| [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s];
    let k1x = *v;
    let k1v = spec.acceleration(x[0], v);
    let v2 = add(v, &k1v, h * T::half());
    let k2v = spec.acceleration(x[0] + k1x[0] * h * T::half(), &v2);
    let v3 = add(v, &k2v, h * T::half());
    let k3v = spec.acceleration(x[0] + v2[0] * h * T::half(), &v3);
    let v4 = add(v, &k3v, h);
    let k4v = spec.acceleration(x[0] + v3[0] * h, &v4);
    let six = T::of(6.0);
    let mut xn = [T::zero(); 3];
    let mut vn = [T::zero(); 3];
    for k in 0..3 {
        xn[k] = x[k] + h / six * (k1x[k] + T::two() * (v2[k] + v3[k]) + v4[k]);
        vn[k] = v[k] + h / six * (k1v[k] + T::two() * (k2v[k] + k3v[k]) + k4v[k]);
    }
    (xn, vn)
}

fn momentum<T: Real>(spec: &SpacetimeSpec<T>, x: &[T; 3], v: &[T; 3]) -> [T; 2] {
    let f = spec.warp.eval(x[0]);
    [f * f * v[1], f * f * v[2]]
}

/// Shoots the geodesic `λ ↦ exp_p(λ v)` with `steps` RK4 steps per unit
/// parameter, until it leaves the slab (truncated exactly on the boundary)
/// or a default parameter cap is reached.
pub fn geodesic_shoot<T: Real>(
    spec: &SpacetimeSpec<T>,
    p: &Point<T>,
    v: &Tangent<T>,
    steps: usize,
) -> Result<GeodesicPath<T>> {
    let lengths = spec.spatial.lengths();
    let scale = spec.height() + lengths[0].max(lengths[1]);
    let speed = v.v.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let max_param = if speed > T::zero() { T::of(8.0) * scale / speed } else { T::one() };
    geodesic_shoot_with(spec, p, v, ShootOptions { steps_per_unit: steps.max(1), max_param })
}

pub fn geodesic_shoot_with<T: Real>(
    spec: &SpacetimeSpec<T>,
    p: &Point<T>,
    v: &Tangent<T>,
    opts: ShootOptions<T>,
) -> Result<GeodesicPath<T>> {
    if v.is_zero() {
        return Err(Error::Precondition("geodesic_shoot needs a nonzero tangent".into()));
    }
    if v.base != *p {
        return Err(Error::BaseMismatch);
    }
    let h = T::one() / T::of_usize(opts.steps_per_unit);
    let mut x = [p.t, p.s[0], p.s[1]];
    let mut vel = v.v;
    let p0 = momentum(spec, &x, &vel);
    let mut path = GeodesicPath {
        params: vec![T::zero()],
        points: vec![*p],
        raw: vec![x],
        velocities: vec![vel],
        hit_boundary: false,
        momentum_drift: T::zero(),
    };
    let (lo, hi) = (spec.t_min, spec.t_max);
    let mut lam = T::zero();
    while lam < opts.max_param {
        let step = h.min(opts.max_param - lam);
        let (mut xn, mut vn) = rk4_step(spec, &x, &vel, step);
        let mut taken = step;
        let exited = xn[0] > hi || xn[0] < lo;
        if exited {
            let target = if xn[0] > hi { hi } else { lo };
            // regula falsi on the sub-step length
            let (mut a, mut b) = (T::zero(), step);
            let (mut fa, mut fb) = (x[0] - target, xn[0] - target);
            for _ in 0..80 {
                let c = if fb != fa { b - fb * (b - a) / (fb - fa) } else { (a + b) * T::half() };
                let c = c.max(a).min(b);
                let (xc, vc) = rk4_step(spec, &x, &vel, c);
                let fc = xc[0] - target;
                xn = xc;
                vn = vc;
                taken = c;
                if fc.abs() <= T::epsilon() * (T::one() + target.abs()) * T::of(4.0) {
                    break;
                }
                if (fc > T::zero()) == (fa > T::zero()) {
                    a = c;
                    fa = fc;
                    fb = fb * T::half();
                } else {
                    b = c;
                    fb = fc;
                    fa = fa * T::half();
                }
            }
            xn[0] = target;
        }
        lam = lam + taken;
        x = xn;
        vel = vn;
        let pm = momentum(spec, &x, &vel);
        let drift = (pm[0] - p0[0]).abs().max((pm[1] - p0[1]).abs());
        path.momentum_drift = path.momentum_drift.max(drift);
        path.params.push(lam);
        path.points.push(spec.canonical(x[0], [x[1], x[2]]));
        path.raw.push(x);
        path.velocities.push(vel);
        if exited {
            path.hit_boundary = true;
            break;
        }
    }
    Ok(path)
}

/// Endpoint of the flow after unit parameter, unwrapped, with its velocity.
#[cfg(test)]
fn flow<T: Real>(spec: &SpacetimeSpec<T>, x0: [T; 3], v0: [T; 3], steps: usize) -> ([T; 3], [T; 3]) {
    if spec.has_constant_warp() {
        return ([x0[0] + v0[0], x0[1] + v0[1], x0[2] + v0[2]], v0);
    }
    let h = T::one() / T::of_usize(steps);
    let (mut x, mut v) = (x0, v0);
    for _ in 0..steps {
        let (xn, vn) = rk4_step(spec, &x, &v, h);
        x = xn;
        v = vn;
    }
    (x, v)
}

/// `exp_p(v)`; errors if the geodesic leaves the slab before parameter 1.
pub fn exp_map<T: Real>(spec: &SpacetimeSpec<T>, p: &Point<T>, v: &Tangent<T>, steps: usize) -> Result<Point<T>> {
    if v.base != *p {
        return Err(Error::BaseMismatch);
    }
    if v.is_zero() {
        return Ok(*p);
    }
    let path = geodesic_shoot_with(spec, p, v, ShootOptions { steps_per_unit: steps.max(1), max_param: T::one() })?;
    if path.hit_boundary && path.param_length() < T::one() - T::epsilon().sqrt() {
        return Err(Error::OutOfRange(format!(
            "geodesic leaves the slab at parameter {}",
            path.param_length()
        )));
    }
    Ok(path.end())
}

/// Linearized geodesic flow over unit parameter. `phi` is the `2n × 2n`
/// state-transition matrix of `(δx, δv)` (rows/cols `0..n` position, `n..2n`
/// velocity), `n` = spacetime dimension.
#[derive(Clone, Debug)]
pub struct Variational<T> {
    pub x1: [T; 3],
    pub v1: [T; 3],
    pub n: usize,
    pub phi: [[T; 6]; 6],
    /// `(λ, x, v, phi)` samples when recording was requested.
    pub trajectory: Vec<(T, [T; 3], [T; 3], [[T; 6]; 6])>,
}

impl<T: Real> Variational<T> {
    /// `∂x(1)/∂x(0)`.
    pub fn dx_dx0(&self) -> Mat3<T> {
        self.block(0, 0)
    }

    /// `∂x(1)/∂v(0)`.
    pub fn dx_dv0(&self) -> Mat3<T> {
        self.block(0, self.n)
    }

    fn block(&self, r: usize, c: usize) -> Mat3<T> {
        let mut m = Mat3::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.phi[r + i][c + j];
            }
        }
        m
    }
}

/// Jacobians of the geodesic acceleration with respect to position and
/// velocity (the acceleration depends on position only through `t`).
fn accel_jacobians<T: Real>(spec: &SpacetimeSpec<T>, t: T, v: &[T; 3]) -> ([[T; 3]; 3], [[T; 3]; 3]) {
    let z = T::zero();
    let mut jx = [[z; 3]; 3];
    let mut jv = [[z; 3]; 3];
    if spec.has_constant_warp() {
        return (jx, jv);
    }
    let (f, df, d2f) = spec.warp.jet(t);
    let two = T::two();
    let ss = v[1] * v[1] + v[2] * v[2];
    let h = df / f;
    let dh = d2f / f - h * h;
    jx[0][0] = -(df * df + f * d2f) * ss;
    jv[0][1] = -two * f * df * v[1];
    jv[0][2] = -two * f * df * v[2];
    for i in 1..3 {
        jx[i][0] = -two * dh * v[0] * v[i];
        jv[i][0] = -two * h * v[i];
        jv[i][i] = -two * h * v[0];
    }
    (jx, jv)
}

type Mat6<T> = [[T; 6]; 6];

fn var_rhs<T: Real>(spec: &SpacetimeSpec<T>, n: usize, x: &[T; 3], v: &[T; 3], m: &Mat6<T>) -> ([T; 3], [T; 3], Mat6<T>) {
    let a = spec.acceleration(x[0], v);
    let (jx, jv) = accel_jacobians(spec, x[0], v);
    let mut dm = [[T::zero(); 6]; 6];
    for c in 0..2 * n {
        for i in 0..n {
            dm[i][c] = m[n + i][c];
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + jx[i][k] * m[k][c] + jv[i][k] * m[n + k][c];
            }
            dm[n + i][c] = acc;
        }
    }
    (*v, a, dm)
}

/// Integrates the geodesic from `(x0, v0)` over `λ ∈ [0, 1]` together with
/// its state-transition matrix. Coordinates are unwrapped.
pub fn integrate_variational<T: Real>(
    spec: &SpacetimeSpec<T>,
    x0: [T; 3],
    v0: [T; 3],
    steps: usize,
    record: bool,
) -> Variational<T> {
    let n = spec.dimension();
    let steps = steps.max(1);
    let h = T::one() / T::of_usize(steps);
    let mut m = [[T::zero(); 6]; 6];
    for (i, row) in m.iter_mut().enumerate().take(2 * n) {
        row[i] = T::one();
    }
    let (mut x, mut v) = (x0, v0);
    let mut trajectory = Vec::new();
    if record {
        trajectory.push((T::zero(), x, v, m));
    }
    let half = T::half();
    for step in 0..steps {
        let lin = |x: &[T; 3], dx: &[T; 3], s: T| [x[0] + dx[0] * s, x[1] + dx[1] * s, x[2] + dx[2] * s];
        let lin6 = |m: &Mat6<T>, dm: &Mat6<T>, s: T| {
            let mut out = *m;
            for i in 0..2 * n {
                for j in 0..2 * n {
                    out[i][j] = m[i][j] + dm[i][j] * s;
                }
            }
            out
        };
        let (k1x, k1v, k1m) = var_rhs(spec, n, &x, &v, &m);
        let (k2x, k2v, k2m) =
            var_rhs(spec, n, &lin(&x, &k1x, h * half), &lin(&v, &k1v, h * half), &lin6(&m, &k1m, h * half));
        let (k3x, k3v, k3m) =
            var_rhs(spec, n, &lin(&x, &k2x, h * half), &lin(&v, &k2v, h * half), &lin6(&m, &k2m, h * half));
        let (k4x, k4v, k4m) = var_rhs(spec, n, &lin(&x, &k3x, h), &lin(&v, &k3v, h), &lin6(&m, &k3m, h));
        let six = T::of(6.0);
        for k in 0..3 {
            x[k] = x[k] + h / six * (k1x[k] + T::two() * (k2x[k] + k3x[k]) + k4x[k]);
            v[k] = v[k] + h / six * (k1v[k] + T::two() * (k2v[k] + k3v[k]) + k4v[k]);
        }
        for i in 0..2 * n {
            for j in 0..2 * n {
                m[i][j] = m[i][j] + h / six * (k1m[i][j] + T::two() * (k2m[i][j] + k3m[i][j]) + k4m[i][j]);
            }
        }
        if record {
            trajectory.push((h * T::of_usize(step + 1), x, v, m));
        }
    }
    Variational { x1: x, v1: v, n, phi: m, trajectory }
}

/// Steps per unit parameter used by shooting-based routines.
pub(crate) const SHOOT_STEPS: usize = 200;

/// `exp_x⁻¹(y)`: the initial velocity of the geodesic from `x` to `y`
/// reached with the minimal-winding chord as initial guess. Closed form for
/// constant warp; Newton shooting otherwise.
pub fn exp_inverse<T: Real>(spec: &SpacetimeSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<[T; 3]> {
    let d = spec.min_displacement(x, y);
    let chord = [y.t - x.t, d[0], d[1]];
    if spec.has_constant_warp() {
        return Ok(chord);
    }
    let n = spec.dimension();
    let x0 = [x.t, x.s[0], x.s[1]];
    let target = [y.t, x.s[0] + d[0], x.s[1] + d[1]];
    let scale = T::one() + chord.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let tol = T::epsilon().sqrt() * T::epsilon().sqrt().sqrt() * scale;
    let mut v = chord;
    for _ in 0..50 {
        let var = integrate_variational(spec, x0, v, SHOOT_STEPS, false);
        let mut r = [T::zero(); 3];
        let mut rn = T::zero();
        for k in 0..n {
            r[k] = var.x1[k] - target[k];
            rn = rn.max(r[k].abs());
        }
        if !rn.is_finite() {
            break;
        }
        if rn <= tol {
            return Ok(v);
        }
        let b = var.dx_dv0();
        let dv = b.solve(&r, T::epsilon() * T::of(16.0)).ok_or(Error::SingularSystem)?;
        for k in 0..n {
            v[k] = v[k] - dv[k];
        }
    }
    Err(Error::ShootingFailed(format!("no geodesic from {x:?} to {y:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{SpatialFactor, Warp};

    fn flat() -> SpacetimeSpec<f64> {
        SpacetimeSpec::flat_circle(-1.0, 1.0, 4.0).unwrap()
    }

    fn warped() -> SpacetimeSpec<f64> {
        SpacetimeSpec::new(-1.0, 1.0, SpatialFactor::Circle { circumference: 4.0 }, Warp::polynomial(vec![1.0, 0.0, 1.0]))
            .unwrap()
    }

    #[test]
    fn flat_vertical_exits_at_one() {
        let spec = flat();
        let p = spec.pt(0.0, 0.0);
        let path = geodesic_shoot(&spec, &p, &Tangent::ts(p, 1.0, 0.0), 64).unwrap();
        assert!(path.hit_boundary);
        let end = path.end();
        assert!((end.t - 1.0).abs() < 1e-14 && end.s[0] == 0.0);
        assert!((path.param_length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_slope_half_is_straight() {
        let spec = flat();
        let p = spec.pt(0.0, 0.0);
        let path = geodesic_shoot(&spec, &p, &Tangent::ts(p, 1.0, 0.5), 50).unwrap();
        for x in &path.raw {
            assert!((x[1] - 0.5 * x[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn warped_momentum_conserved() {
        let spec = warped();
        let p = spec.pt(-0.5, 1.0);
        let path = geodesic_shoot(&spec, &p, &Tangent::ts(p, 1.0, 0.3), 400).unwrap();
        assert!(path.hit_boundary);
        let per_unit = path.momentum_drift / path.param_length();
        assert!(per_unit < 1e-8, "drift {per_unit}");
    }

    #[test]
    fn zero_tangent_rejected() {
        let spec = flat();
        let p = spec.pt(0.0, 0.0);
        assert!(geodesic_shoot(&spec, &p, &Tangent::ts(p, 0.0, 0.0), 10).is_err());
    }

    #[test]
    fn exp_inverse_round_trip_warped() {
        let spec = warped();
        let x = spec.pt(-0.4, 0.2);
        let y = spec.pt(0.5, 0.7);
        let v = exp_inverse(&spec, &x, &y).unwrap();
        let back = exp_map(&spec, &x, &Tangent::new(x, v), 400).unwrap();
        assert!((back.t - y.t).abs() < 1e-8 && (back.s[0] - y.s[0]).abs() < 1e-8);
    }

    #[test]
    fn variational_matches_finite_difference() {
        let spec = warped();
        let x0 = [-0.3, 0.0, 0.0];
        let v0 = [1.0, 0.4, 0.0];
        let var = integrate_variational(&spec, x0, v0, 400, false);
        let eps = 1e-6;
        for k in 0..2 {
            let mut vp = v0;
            let mut vm = v0;
            vp[k] += eps;
            vm[k] -= eps;
            let (xp, _) = flow(&spec, x0, vp, 400);
            let (xm, _) = flow(&spec, x0, vm, 400);
            for i in 0..2 {
                let fd = (xp[i] - xm[i]) / (2.0 * eps);
                assert!((fd - var.phi[i][2 + k]).abs() < 1e-6);
            }
        }
    }
}
