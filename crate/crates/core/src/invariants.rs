//! Bounding functions of a slab: curvature, boundary shape, diameter,
//! causal-cone volumes, injectivity radii and the membership predicate for a
//! bound vector `b`.

use crate::curvature::{christoffel, gaussian_curvature, riemann, sectional, Stencil};
use crate::embedding::{pullback_metric, FSpec};
use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::lorentz::{relation, SigmaSolver, DEFAULT_RADIUS};
use crate::scalar::{pairwise_sum, Real};
use crate::spacetime::{integrate_variational, Grid, Point, SpacetimeSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The metric `diag(−1, f², f²)` as a function of coordinates.
pub fn metric_fn<T: Real>(spec: &SpacetimeSpec<T>) -> impl Fn(&[T; 3]) -> Mat3<T> + '_ {
    let n = spec.dimension();
    move |x: &[T; 3]| {
        let f = spec.warp.eval(x[0]);
        let mut m = Mat3::zeros(n);
        m.a[0][0] = -T::one();
        for k in 1..n {
            m.a[k][k] = f * f;
        }
        m
    }
}

/// Default finite-difference step for curvature of the slab metric.
pub fn default_step<T: Real>(spec: &SpacetimeSpec<T>) -> T {
    T::epsilon().sqrt().sqrt() * spec.height().max(T::one())
}

/// Timelike planes probed for the cospacelike sectional curvature at time
/// `t`: `(∂_t, ∂_s1)` and, on tori, boosted planes against `∂_s2`.
fn timelike_planes<T: Real>(spec: &SpacetimeSpec<T>, t: T) -> Vec<([T; 3], [T; 3])> {
    let z = T::zero();
    let mut planes = vec![([T::one(), z, z], [z, T::one(), z])];
    if spec.spatial_dims() == 2 {
        let f = spec.warp.eval(t);
        for eta in [0.0, 0.5, 1.0] {
            let eta = T::of(eta);
            planes.push(([eta.cosh(), eta.sinh() / f, z], [z, z, T::one() / f]));
        }
    }
    planes
}

/// Sectional curvature of a timelike plane at `p` (default: the smallest
/// over [`timelike_planes`]).
pub fn csec<T: Real>(spec: &SpacetimeSpec<T>, p: &Point<T>, plane: Option<([T; 3], [T; 3])>) -> Result<T> {
    let g = metric_fn(spec);
    let x = [p.t, p.s[0], p.s[1]];
    let r = riemann(&g, &x, &Stencil::uniform(default_step(spec)))?;
    let g0 = g(&x);
    let planes = match plane {
        Some(pl) => vec![pl],
        None => timelike_planes(spec, p.t),
    };
    let mut k = T::infinity();
    for (u, v) in &planes {
        let q = spec.metric(p.t, u, u) * spec.metric(p.t, v, v) - spec.metric(p.t, u, v).powi(2);
        if !(q < T::zero()) {
            return Err(Error::Precondition("plane is not timelike".into()));
        }
        k = k.min(sectional(&r, &g0, u, v)?);
    }
    Ok(k)
}

/// Times at which the slab is sampled: the layer centers of `grid` and
/// both boundary times.
fn sample_times<T: Real>(grid: &Grid<T>) -> Vec<T> {
    let spec = grid.spec();
    let mut ts = vec![spec.t_min];
    ts.extend((0..grid.nt).map(|it| grid.node(grid.layer(it).start).t));
    ts.push(spec.t_max);
    ts
}

/// Infimum of [`csec`] over the sample times.
pub fn csec_min<T: Real>(grid: &Grid<T>) -> Result<T> {
    let spec = grid.spec();
    let ks = sample_times(grid)
        .par_iter()
        .map(|&t| csec(spec, &spec.canonical(t, [T::zero(); 2]), None))
        .collect::<Result<Vec<T>>>()?;
    Ok(ks.into_iter().fold(T::infinity(), T::min))
}

/// Shape operator `S^i_j = Γ^i_{j t}` of the slice `t = const` at `p`.
pub fn shape_operator<T: Real>(spec: &SpacetimeSpec<T>, p: &Point<T>) -> Result<Mat3<T>> {
    let g = metric_fn(spec);
    let gam = christoffel(&g, &[p.t, p.s[0], p.s[1]], &Stencil::uniform(default_step(spec)))?;
    let m = spec.spatial_dims();
    let mut s = Mat3::zeros(m);
    for i in 0..m {
        for j in 0..m {
            s.a[i][j] = gam[i + 1][j + 1][0];
        }
    }
    Ok(s)
}

/// `√tr(S²)`.
pub fn shape_norm<T: Real>(s: &Mat3<T>) -> T {
    let mut acc = T::zero();
    for i in 0..s.n {
        for j in 0..s.n {
            acc = acc + s.a[i][j] * s.a[j][i];
        }
    }
    acc.max(T::zero()).sqrt()
}

/// Supremum of the second-fundamental-form norm over the boundary nodes.
pub fn k2_boundary<T: Real>(grid: &Grid<T>) -> Result<T> {
    let spec = grid.spec();
    let norms = grid
        .boundary_nodes()
        .par_iter()
        .map(|p| shape_operator(spec, p).map(|s| shape_norm(&s)))
        .collect::<Result<Vec<T>>>()?;
    Ok(norms.into_iter().fold(T::zero(), T::max))
}

/// One representative per time layer plus one per boundary ring.
fn representatives<T: Real>(grid: &Grid<T>) -> Vec<Point<T>> {
    let mut reps: Vec<Point<T>> = (0..grid.nt).map(|it| grid.node(grid.layer(it).start)).collect();
    let b = grid.boundary_nodes();
    reps.push(b[0]);
    reps.push(b[grid.layer_size()]);
    reps
}

/// Lorentzian diameter `sup σ` over sources (layer representatives and
/// boundary) and targets (interior nodes; boundary nodes as well when σ has
/// a closed form). Uses the spatial homogeneity of the slab.
pub fn cdiam<T: Real>(grid: &Grid<T>) -> Result<T> {
    let spec = grid.spec();
    let solver = SigmaSolver::new(grid, DEFAULT_RADIUS)?;
    let reps = representatives(grid);
    let per = reps
        .par_iter()
        .map(|x| {
            let field = solver.field(x)?;
            let mut m = field.values.values.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
            if spec.has_constant_warp() {
                for y in grid.boundary_nodes() {
                    m = m.max(solver.sigma(x, y).abs());
                }
            }
            Ok(m)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(per.into_iter().fold(T::zero(), T::max))
}

/// `vol(J(p))` and `vol(J(p) ∩ ∂X)` as weighted node counts, with the
/// exact causal relation.
pub fn jvol<T: Real>(grid: &Grid<T>, p: &Point<T>) -> (T, T) {
    let spec = grid.spec();
    let nodes = grid.nodes();
    let w = grid.weights();
    let inside = |y: &Point<T>| relation(spec, p, y).is_causal();
    let vol = pairwise_sum(nodes.len(), |i| if inside(&nodes[i]) { w[i] } else { T::zero() });
    let b = grid.boundary_nodes();
    let bw = grid.boundary_weights();
    let bvol = pairwise_sum(b.len(), |i| if inside(&b[i]) { bw[i] } else { T::zero() });
    (vol, bvol)
}

/// `(sup_p vol(J(p)), sup_p vol(J(p) ∩ ∂X))` over interior and boundary
/// sources.
pub fn jvol_sup<T: Real>(grid: &Grid<T>) -> (T, T) {
    representatives(grid)
        .par_iter()
        .map(|p| jvol(grid, p))
        .reduce(|| (T::zero(), T::zero()), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

/// Rapidities of the geodesics probed for conjugate points.
const RAPIDITIES: usize = 25;
const MAX_RAPIDITY: f64 = 3.0;
const CONJUGATE_STEPS: usize = 400;

/// Proper time `t' − t` at which the conformal time from `t` reaches `eta`
/// towards the future or past boundary, if inside the slab.
fn conformal_reach<T: Real>(spec: &SpacetimeSpec<T>, t: T, eta: T, future: bool) -> Option<T> {
    let end = if future { spec.t_max } else { spec.t_min };
    let total = spec.warp.conformal_time(t, end).abs();
    if total < eta {
        return None;
    }
    let (mut lo, mut hi) = (T::zero(), (end - t).abs());
    let sgn = if future { T::one() } else { -T::one() };
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        if spec.warp.conformal_time(t, t + sgn * mid).abs() < eta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * (T::one() + hi) {
            break;
        }
    }
    Some(hi)
}

/// First conjugate proper time along the unit geodesic from `x` with
/// rapidity `eta` along `∂_s1`, found as a sign change of `det ∂x/∂v₀`.
fn conjugate_time<T: Real>(spec: &SpacetimeSpec<T>, x: &Point<T>, eta: T, future: bool) -> Option<T> {
    let span = if future { spec.t_max - x.t } else { x.t - spec.t_min };
    if span <= T::zero() {
        return None;
    }
    let sgn = if future { T::one() } else { -T::one() };
    let f = spec.warp.eval(x.t);
    let v0 = [sgn * eta.cosh() * span, sgn * eta.sinh() / f * span, T::zero()];
    let var = integrate_variational(spec, [x.t, x.s[0], x.s[1]], v0, CONJUGATE_STEPS, true);
    let n = var.n;
    let det = |phi: &[[T; 6]; 6]| {
        let mut b = Mat3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b.a[i][j] = phi[i][n + j];
            }
        }
        b.det()
    };
    let mut prev: Option<(T, T)> = None;
    for (lam, xx, _, phi) in var.trajectory.iter().skip(1) {
        if xx[0] > spec.t_max || xx[0] < spec.t_min {
            break;
        }
        let d = det(phi);
        if let Some((l0, d0)) = prev {
            if d0 > T::zero() && d <= T::zero() {
                let lc = l0 + (*lam - l0) * d0 / (d0 - d);
                return Some(lc * span);
            }
        }
        prev = Some((*lam, d));
    }
    None
}

/// `(injrad⁺(x), injrad⁻(x))`: the largest proper time of a vertical `w`
/// whose double cone stays inside the slab, does not wrap around the
/// shortest spatial loop, and contains no conjugate point.
pub fn injrad_pm<T: Real>(spec: &SpacetimeSpec<T>, x: &Point<T>) -> (T, T) {
    let loop_len = {
        let l = spec.spatial.lengths();
        if spec.spatial_dims() == 2 {
            l[0].min(l[1])
        } else {
            l[0]
        }
    };
    let one_side = |future: bool| {
        let mut r = if future { spec.t_max - x.t } else { x.t - spec.t_min };
        if r <= T::zero() {
            return T::zero();
        }
        if let Some(w) = conformal_reach(spec, x.t, loop_len, future) {
            r = r.min(w);
        }
        if !spec.has_constant_warp() {
            for k in 0..RAPIDITIES {
                let eta = T::of(MAX_RAPIDITY * (2.0 * k as f64 / (RAPIDITIES - 1) as f64 - 1.0));
                if let Some(tc) = conjugate_time(spec, x, eta, future) {
                    // a vector of rapidity η and length τ lies in the double
                    // cone of a vertical w iff |w| > τ e^|η|
                    r = r.min(tc * eta.abs().exp());
                }
            }
        }
        r
    };
    (one_side(true), one_side(false))
}

/// Injectivity radii at every interior node (row-major like the grid),
/// evaluated once per layer.
pub fn injrad_fields<T: Real>(grid: &Grid<T>) -> (Vec<T>, Vec<T>) {
    let spec = grid.spec();
    let per_layer: Vec<(T, T)> =
        (0..grid.nt).into_par_iter().map(|it| injrad_pm(spec, &grid.node(grid.layer(it).start))).collect();
    let m = grid.layer_size();
    let plus = per_layer.iter().flat_map(|r| std::iter::repeat(r.0).take(m)).collect();
    let minus = per_layer.iter().flat_map(|r| std::iter::repeat(r.1).take(m)).collect();
    (plus, minus)
}

/// `Γ = inf max(injrad⁺, injrad⁻)` over layer representatives and the
/// boundary.
pub fn gamma<T: Real>(grid: &Grid<T>) -> T {
    let spec = grid.spec();
    representatives(grid)
        .par_iter()
        .map(|p| {
            let (a, b) = injrad_pm(spec, p);
            a.max(b)
        })
        .reduce(T::infinity, T::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub csec_min: f64,
    pub k2_sup: f64,
    pub vol: f64,
    pub vol_grid: f64,
    pub cdiam: f64,
    pub jvol_sup: f64,
    pub jvol_boundary_sup: f64,
    /// `vol(J(p))` at the slab center.
    pub jvol_center: f64,
    pub injrad_plus: Vec<f64>,
    pub injrad_minus: Vec<f64>,
    pub gamma: f64,
    pub grid: [usize; 3],
}

pub fn invariant_report<T: Real>(grid: &Grid<T>) -> Result<InvariantReport> {
    let spec = grid.spec();
    let (jv, jb) = jvol_sup(grid);
    let mid = (spec.t_min + spec.t_max) * T::half();
    let center = spec.canonical(mid, [T::zero(); 2]);
    let (ip, im) = injrad_fields(grid);
    let f = |v: Vec<T>| v.into_iter().map(T::as_f64).collect();
    Ok(InvariantReport {
        csec_min: csec_min(grid)?.as_f64(),
        k2_sup: k2_boundary(grid)?.as_f64(),
        vol: spec.analytic_volume().as_f64(),
        vol_grid: grid.total_weight().as_f64(),
        cdiam: cdiam(grid)?.as_f64(),
        jvol_sup: jv.as_f64(),
        jvol_boundary_sup: jb.as_f64(),
        jvol_center: jvol(grid, &center).0.as_f64(),
        injrad_plus: f(ip),
        injrad_minus: f(im),
        gamma: gamma(grid).as_f64(),
        grid: [grid.nt, grid.ns[0], grid.ns[1]],
    })
}

/// Per-constraint flags of the bound predicate and their conjunction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub flags: [bool; 7],
    pub all: bool,
}

/// Checks `−csec ≤ b₁`, `k₂ ≤ e^{b₂}`, `cdiam ≤ e^{b₃}`, `1/vol ≤ e^{b₄}`,
/// `Jvol ≤ e^{b₅}`, `1/Γ ≤ e^{b₆}`, `Jvol(∂X) ≤ e^{b₇}`.
pub fn membership(r: &InvariantReport, b: &[f64; 7]) -> Membership {
    let flags = [
        -r.csec_min <= b[0],
        r.k2_sup <= b[1].exp(),
        r.cdiam <= b[2].exp(),
        1.0 / r.vol <= b[3].exp(),
        r.jvol_sup <= b[4].exp(),
        1.0 / r.gamma <= b[5].exp(),
        r.jvol_boundary_sup <= b[6].exp(),
    ];
    Membership { flags, all: flags.iter().all(|&f| f) }
}

/// Gaussian curvature of the pullback metric of a 2D slab at `points`,
/// with finite-difference steps of `cells` grid cells.
pub fn pullback_curvature<T: Real>(grid: &Grid<T>, fspec: FSpec, points: &[Point<T>], cells: usize) -> Result<Vec<T>> {
    let spec = grid.spec();
    if spec.spatial_dims() != 1 {
        return Err(Error::Precondition("pullback curvature needs a 2D slab".into()));
    }
    if cells == 0 {
        return Err(Error::StepUnderflow);
    }
    let c = T::of_usize(cells);
    let st = Stencil { h: [c * grid.dt, c * grid.ds[0], T::one()], richardson: cells % 2 == 0 };
    let reach = T::two() * st.h[0];
    points
        .par_iter()
        .map(|p| {
            if p.t - reach < spec.t_min || p.t + reach > spec.t_max {
                return Err(Error::OutOfRange(format!("t = {} too close to the boundary for the stencil", p.t)));
            }
            let g = |x: &[T; 3]| {
                pullback_metric(grid, &spec.canonical(x[0], [x[1], T::zero()]), fspec)
                    .map(|m| m.g)
                    .unwrap_or_else(|_| Mat3::zeros(2))
            };
            gaussian_curvature(&g, &[p.t, p.s[0], T::zero()], &st)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::riemann_direct;
    use crate::spacetime::{SpatialFactor, Warp};
    use proptest::prelude::*;

    fn flat(t0: f64, t1: f64, l: f64) -> SpacetimeSpec<f64> {
        SpacetimeSpec::flat_circle(t0, t1, l).unwrap()
    }

    fn quadratic() -> SpacetimeSpec<f64> {
        SpacetimeSpec::new(-1.0, 1.0, SpatialFactor::Circle { circumference: 4.0 }, Warp::polynomial(vec![1.0, 0.0, 1.0]))
            .unwrap()
    }

    #[test]
    fn csec_flat_and_constant_warp() {
        let s = flat(-1.0, 1.0, 4.0);
        assert!(csec(&s, &s.pt(0.3, 1.0), None).unwrap().abs() < 1e-6);
        let c = SpacetimeSpec::<f64>::new(0.0, 1.0, SpatialFactor::Circle { circumference: 2.0 }, Warp::constant(0.3)).unwrap();
        assert!(csec(&c, &c.pt(0.5, 0.2), None).unwrap().abs() < 1e-6);
        let torus =
            SpacetimeSpec::<f64>::new(0.0, 1.0, SpatialFactor::Torus { l1: 2.0, l2: 3.0 }, Warp::constant(2.0)).unwrap();
        let p = torus.point(0.5, &[0.1, 0.2]).unwrap();
        assert!(csec(&torus, &p, None).unwrap().abs() < 1e-6);
    }

    #[test]
    fn csec_warped_matches_direct_stencil() {
        let s = quadratic();
        let g = metric_fn(&s);
        for t in [-0.5, 0.0, 0.4, 0.8] {
            let p = s.pt(t, 1.0);
            let k = csec(&s, &p, None).unwrap();
            let x = [t, 1.0, 0.0];
            let r = riemann_direct(&g, &x, &[1e-3; 3]).unwrap();
            let k2 = sectional(&r, &g(&x), &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
            assert!((k - k2).abs() < 1e-4, "t = {t}: {k} vs {k2}");
            assert!(k.abs() > 0.1);
        }
    }

    #[test]
    fn csec_rejects_spacelike_plane() {
        let s = flat(0.0, 1.0, 1.0);
        let plane = ([0.0, 1.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(csec(&s, &s.pt(0.5, 0.0), Some(plane)).is_err());
    }

    #[test]
    fn k2_flat_and_warped() {
        let s = flat(-1.0, 1.0, 4.0);
        let g = Grid::build(&s, 8, &[8]).unwrap();
        assert!(k2_boundary(&g).unwrap() < 1e-6);
        let c = SpacetimeSpec::new(0.0, 1.0, SpatialFactor::Circle { circumference: 2.0 }, Warp::constant(0.5)).unwrap();
        assert!(k2_boundary(&Grid::build(&c, 8, &[8]).unwrap()).unwrap() < 1e-6);

        // ½ h⁻¹ ∂_t h of the induced metric h = f², by central differences
        let q = quadratic();
        let d = 1e-5;
        let h = |t: f64| q.warp.eval(t).powi(2);
        let oracle = 0.5 * (h(1.0 + d) - h(1.0 - d)) / (2.0 * d) / h(1.0);
        let s = shape_operator(&q, &q.pt(1.0, 0.0)).unwrap();
        assert!((shape_norm(&s) - oracle.abs()).abs() < 1e-4, "{} vs {oracle}", shape_norm(&s));
        let g = Grid::build(&q, 8, &[8]).unwrap();
        assert!((k2_boundary(&g).unwrap() - oracle.abs()).abs() < 1e-4);
    }

    #[test]
    fn cdiam_examples() {
        let g = Grid::build(&flat(-1.0, 1.0, 4.0), 16, &[16]).unwrap();
        assert!((cdiam(&g).unwrap() - 2.0).abs() < 1e-12);
        let g = Grid::build(&flat(0.0, 1.0, 4.0), 16, &[16]).unwrap();
        assert!((cdiam(&g).unwrap() - 1.0).abs() < 1e-12);
        let g = Grid::build(&flat(0.0, 0.5, 4.0), 16, &[16]).unwrap();
        assert!((cdiam(&g).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn jvol_center_cone() {
        let s = flat(-1.0, 1.0, 4.0);
        let g = Grid::build(&s, 128, &[128]).unwrap();
        let (v, b) = jvol(&g, &s.pt(0.0, 0.0));
        assert!((v - 2.0).abs() < 0.03 * 2.0, "{v}");
        // both rings meet the cone in an arc of length 2
        assert!((b - 4.0).abs() < 0.1, "{b}");
    }

    #[test]
    fn jvol_future_boundary_is_past_cone() {
        let s = flat(-1.0, 1.0, 4.0);
        let g = Grid::build(&s, 32, &[32]).unwrap();
        let top = g.boundary_nodes()[g.layer_size()];
        let (v, _) = jvol(&g, &top);
        let past: f64 = g
            .nodes()
            .iter()
            .zip(g.weights())
            .filter(|(y, _)| relation(&s, &top, y).is_causal())
            .map(|(_, w)| *w)
            .sum();
        assert!((v - past).abs() < 1e-12);
        assert!(g.nodes().iter().all(|y| !relation(&s, &top, y).causal_future() || y.t >= top.t));
    }

    #[test]
    fn jvol_saturates_on_small_circle() {
        let s = flat(-1.0, 1.0, 0.25);
        let g = Grid::build(&s, 64, &[16]).unwrap();
        let (v, _) = jvol(&g, &s.pt(0.0, 0.0));
        let total = g.total_weight();
        assert!(v > 0.85 * total && v <= total + 1e-12, "{v} of {total}");
    }

    #[test]
    fn injrad_flat() {
        let s = flat(-1.0, 1.0, 4.0);
        for t in [-0.5, 0.0, 0.7] {
            let (p, m) = injrad_pm(&s, &s.pt(t, 1.0));
            assert!((p - (1.0 - t)).abs() < 1e-12);
            assert!((m - (1.0 + t)).abs() < 1e-12);
        }
        assert_eq!(injrad_pm(&s, &s.pt(1.0, 0.0)).0, 0.0);
        let g = Grid::build(&s, 64, &[8]).unwrap();
        assert!((gamma(&g) - 1.0).abs() <= g.dt);
    }

    #[test]
    fn injrad_wraps_on_thin_circle() {
        let s = SpacetimeSpec::<f64>::new(0.0, 1.0, SpatialFactor::Circle { circumference: 2.0 }, Warp::constant(0.1)).unwrap();
        let (p, m) = injrad_pm(&s, &s.pt(0.5, 0.0));
        assert!((p - 0.2).abs() < 1e-9 && (m - 0.2).abs() < 1e-9, "{p} {m}");
    }

    #[test]
    fn injrad_warped_bounded_by_boundary() {
        let s = quadratic();
        for t in [-0.5, 0.0, 0.5] {
            let (p, m) = injrad_pm(&s, &s.pt(t, 0.0));
            assert!(p > 0.0 && p <= 1.0 - t + 1e-12);
            assert!(m > 0.0 && m <= 1.0 + t + 1e-12);
        }
    }

    #[test]
    fn conjugate_points_on_contracting_warp() {
        // f = 1 − t²/2 focuses timelike geodesics
        let s = SpacetimeSpec::new(-1.0, 1.0, SpatialFactor::Circle { circumference: 40.0 }, Warp::polynomial(vec![1.0, 0.0, -0.45]))
            .unwrap();
        let x = s.pt(-0.9, 0.0);
        let found = (0..RAPIDITIES).any(|k| {
            let eta = MAX_RAPIDITY * (2.0 * k as f64 / (RAPIDITIES - 1) as f64 - 1.0);
            conjugate_time(&s, &x, eta, true).is_some()
        });
        let (p, _) = injrad_pm(&s, &x);
        assert!(p <= 1.9 + 1e-12);
        if found {
            assert!(p < 1.9);
        }
    }

    #[test]
    fn report_flat_slab() {
        let s = flat(-1.0, 1.0, 4.0);
        let g = Grid::build(&s, 32, &[32]).unwrap();
        let r = invariant_report(&g).unwrap();
        assert!(r.vol > 0.0);
        assert!((r.vol - 8.0).abs() < 1e-12);
        assert!(r.gamma <= r.cdiam);
        assert!(r.jvol_sup <= r.vol);
        assert!(r.csec_min.abs() < 1e-6 && r.k2_sup < 1e-6);
        assert_eq!(r.injrad_plus.len(), g.len());
    }

    #[test]
    fn membership_examples() {
        let s = flat(-1.0, 1.0, 4.0);
        let r = invariant_report(&Grid::build(&s, 16, &[16]).unwrap()).unwrap();
        assert!(membership(&r, &[10.0; 7]).all);
        assert!(membership(&r, &[f64::INFINITY; 7]).all);
        let mut b = [10.0; 7];
        b[2] = 0.0;
        let m = membership(&r, &b);
        assert!(!m.flags[2] && !m.all);
        assert_eq!(m.flags.iter().filter(|f| !**f).count(), 1);
    }

    #[test]
    fn homogeneous_fields() {
        let s = flat(-1.0, 1.0, 4.0);
        let g = Grid::build(&s, 16, &[16]).unwrap();
        for it in [3, 8] {
            let layer: Vec<usize> = g.layer(it).collect();
            let (v0, b0) = jvol(&g, &g.node(layer[0]));
            let (i0, m0) = injrad_pm(&s, &g.node(layer[0]));
            for &i in &layer[1..] {
                let (v, b) = jvol(&g, &g.node(i));
                assert!((v - v0).abs() < 1e-9 && (b - b0).abs() < 1e-9);
                let (ip, im) = injrad_pm(&s, &g.node(i));
                assert!((ip - i0).abs() < 1e-9 && (im - m0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pullback_curvature_homogeneous() {
        let s = flat(-1.0, 1.0, 4.0);
        let g = Grid::build(&s, 24, &[24]).unwrap();
        let it = 12;
        let pts: Vec<Point<f64>> = g.layer(it).step_by(5).map(|i| g.node(i)).collect();
        let k = pullback_curvature(&g, FSpec::H, &pts, 2).unwrap();
        assert!(k.iter().all(|v| v.is_finite()));
        for v in &k[1..] {
            assert!((v - k[0]).abs() <= 1e-9 * k[0].abs().max(1.0), "{v} vs {}", k[0]);
        }
        assert!(pullback_curvature(&g, FSpec::H, &[g.node(0)], 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn membership_monotone(b in prop::array::uniform7(-5.0f64..5.0), extra in prop::array::uniform7(0.0f64..3.0)) {
            let r = InvariantReport {
                csec_min: -0.3, k2_sup: 0.2, vol: 8.0, vol_grid: 8.0, cdiam: 2.0, jvol_sup: 4.0,
                jvol_boundary_sup: 4.0, jvol_center: 2.0, injrad_plus: vec![], injrad_minus: vec![],
                gamma: 1.0, grid: [0; 3],
            };
            let lo = membership(&r, &b);
            let mut hi_b = b;
            for k in 0..7 {
                hi_b[k] += extra[k];
            }
            let hi = membership(&r, &hi_b);
            for k in 0..7 {
                prop_assert!(!lo.flags[k] || hi.flags[k]);
            }
            prop_assert!(!lo.all || hi.all);
        }

        #[test]
        fn gamma_below_cdiam(h in 0.3f64..3.0, l in 0.5f64..6.0, c in 0.2f64..2.0) {
            let s = SpacetimeSpec::new(0.0, h, SpatialFactor::Circle { circumference: l }, Warp::constant(c)).unwrap();
            let g = Grid::build(&s, 8, &[8]).unwrap();
            prop_assert!(gamma(&g) <= cdiam(&g).unwrap() + 1e-12);
            prop_assert!(jvol_sup(&g).0 <= g.total_weight() + 1e-12);
        }
    }
}
