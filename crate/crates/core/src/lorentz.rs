//! Signed Lorentzian distance: closed form on flat slabs, longest paths on a
//! causal stencil DAG in general, and exact causal relations.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::Real;
use crate::spacetime::{gauss_legendre_composite, Grid, Point, SpacetimeSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default stencil radius in grid steps.
pub const DEFAULT_RADIUS: usize = 5;

/// `σ(x, y)` on a constant-warp slab.
pub fn sigma_flat<T: Real>(spec: &SpacetimeSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<T> {
    if !spec.has_constant_warp() {
        return Err(Error::NonConstantWarp);
    }
    Ok(sigma_flat_unchecked(spec, x, y))
}

#[inline]
pub(crate) fn sigma_flat_unchecked<T: Real>(spec: &SpacetimeSpec<T>, x: &Point<T>, y: &Point<T>) -> T {
    let c = spec.warp.coeffs()[0];
    let dt = y.t - x.t;
    let d = spec.spatial_distance(x, y) * c;
    let gap = dt * dt - d * d;
    if dt == T::zero() || gap <= T::zero() {
        T::zero()
    } else {
        dt.signum() * gap.sqrt()
    }
}

/// Proper time of the straight coordinate chord from time `t0` with
/// displacement `(dt, ds)`, `dt > 0`; `None` when the chord is not causal
/// everywhere.
pub fn chord_proper_time<T: Real>(spec: &SpacetimeSpec<T>, t0: T, dt: T, ds: [T; 2]) -> Option<T> {
    if dt <= T::zero() {
        return None;
    }
    let s2 = ds[0] * ds[0] + ds[1] * ds[1];
    let tol = T::cone_tolerance() * dt * dt;
    if spec.has_constant_warp() {
        let c = spec.warp.coeffs()[0];
        let gap = dt * dt - c * c * s2;
        return if gap < -tol { None } else { Some(gap.max(T::zero()).sqrt()) };
    }
    let fmax = spec.warp.max_on(t0, t0 + dt);
    if dt * dt - fmax * fmax * s2 < -tol {
        return None;
    }
    let integrand = |t: T| {
        let f = spec.warp.eval(t);
        (dt * dt - f * f * s2).max(T::zero()).sqrt()
    };
    // substitute t = t0 + λ dt, so the λ-integral is (1/dt)·∫ dt
    Some(gauss_legendre_composite(t0, t0 + dt, 4, integrand) / dt)
}

/// Stencil DAG on a grid: node `i` at layer `it` links to the node at layer
/// `it + k` shifted by `(d1, d2)` cells, for `1 ≤ k ≤ R`, `|d·| ≤ R`, when the
/// chord is causal.
#[derive(Clone, Debug)]
pub struct CausalDag<'g, T> {
    grid: &'g Grid<T>,
    radius: usize,
    offsets: Vec<[isize; 3]>,
    /// `weights[it][o]`: chord proper time from layer `it` along offset `o`.
    weights: Vec<Vec<Option<T>>>,
}

/// Builds the stencil DAG with neighbor radius `radius ≥ 2`.
pub fn causal_graph<T: Real>(grid: &Grid<T>, radius: usize) -> Result<CausalDag<'_, T>> {
    if radius < 2 {
        return Err(Error::Precondition(format!("neighbor radius must be at least 2, got {radius}")));
    }
    let spec = grid.spec();
    let r = radius as isize;
    let r2 = if spec.spatial_dims() == 2 { r } else { 0 };
    let mut offsets = Vec::new();
    for k in 1..=r {
        for d1 in -r..=r {
            for d2 in -r2..=r2 {
                offsets.push([k, d1, d2]);
            }
        }
    }
    let chord = |t0: T, o: &[isize; 3]| {
        let dt = grid.dt * T::of(o[0] as f64);
        let ds = [grid.ds[0] * T::of(o[1] as f64), grid.ds[1] * T::of(o[2] as f64)];
        chord_proper_time(spec, t0, dt, ds)
    };
    let weights: Vec<Vec<Option<T>>> = if spec.has_constant_warp() {
        let row: Vec<Option<T>> = offsets.iter().map(|o| chord(spec.t_min, o)).collect();
        vec![row; grid.nt]
    } else {
        (0..grid.nt)
            .map(|it| {
                let t0 = grid.node(grid.layer(it).start).t;
                offsets.iter().map(|o| chord(t0, o)).collect()
            })
            .collect()
    };
    // drop offsets that are never causal
    let keep: Vec<usize> = (0..offsets.len()).filter(|&o| weights.iter().any(|row| row[o].is_some())).collect();
    let offsets = keep.iter().map(|&o| offsets[o]).collect();
    let weights = weights.into_iter().map(|row| keep.iter().map(|&o| row[o]).collect()).collect();
    Ok(CausalDag { grid, radius, offsets, weights })
}

impl<'g, T: Real> CausalDag<'g, T> {
    pub fn grid(&self) -> &'g Grid<T> {
        self.grid
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    fn target(&self, i: usize, o: &[isize; 3]) -> Option<usize> {
        let g = self.grid;
        let it = g.time_index(i) + o[0] as usize;
        if it >= g.nt {
            return None;
        }
        let (i1, i2) = g.spatial_index(i);
        let j1 = (i1 as isize + o[1]).rem_euclid(g.ns[0] as isize) as usize;
        let j2 = (i2 as isize + o[2]).rem_euclid(g.ns[1] as isize) as usize;
        Some(g.index(it, j1, j2))
    }

    /// Calls `visit(j, w)` for every out-edge `i → j`.
    #[inline]
    pub fn for_each_out_edge(&self, i: usize, mut visit: impl FnMut(usize, T)) {
        let row = &self.weights[self.grid.time_index(i)];
        for (o, w) in self.offsets.iter().zip(row) {
            if let (Some(w), Some(j)) = (w, self.target(i, o)) {
                visit(j, *w);
            }
        }
    }

    /// Calls `visit(j, w)` for every in-edge `j → i`.
    #[inline]
    pub fn for_each_in_edge(&self, i: usize, mut visit: impl FnMut(usize, T)) {
        let g = self.grid;
        let it = g.time_index(i);
        let (i1, i2) = g.spatial_index(i);
        for (k, o) in self.offsets.iter().enumerate() {
            let k_t = o[0] as usize;
            if k_t > it {
                continue;
            }
            if let Some(w) = self.weights[it - k_t][k] {
                let j1 = (i1 as isize - o[1]).rem_euclid(g.ns[0] as isize) as usize;
                let j2 = (i2 as isize - o[2]).rem_euclid(g.ns[1] as isize) as usize;
                visit(g.index(it - k_t, j1, j2), w);
            }
        }
    }

    pub fn out_degree(&self, i: usize) -> usize {
        let mut n = 0;
        self.for_each_out_edge(i, |_, _| n += 1);
        n
    }

    /// All edges `(i, j, w)`; intended for inspection and tests.
    pub fn edges(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..self.grid.len() {
            self.for_each_out_edge(i, |j, w| out.push((i, j, w)));
        }
        out
    }

    /// Largest edge weight leaving layer `it` (used as chronology threshold).
    pub fn max_edge_weight(&self) -> T {
        self.weights.iter().flatten().flatten().fold(T::zero(), |m, &w| m.max(w))
    }

    /// Longest-path values from `src` to every node in its future
    /// (`−∞` where unreachable).
    pub fn longest_future(&self, src: usize) -> Vec<T> {
        let g = self.grid;
        let mut dist = vec![T::neg_infinity(); g.len()];
        dist[src] = T::zero();
        let start = g.time_index(src);
        for it in start..g.nt {
            for i in g.layer(it) {
                let di = dist[i];
                if di == T::neg_infinity() {
                    continue;
                }
                self.for_each_out_edge(i, |j, w| {
                    let cand = di + w;
                    if cand > dist[j] {
                        dist[j] = cand;
                    }
                });
            }
        }
        dist
    }

    /// Longest-path values from every node in the past of `dst` to `dst`.
    pub fn longest_past(&self, dst: usize) -> Vec<T> {
        let g = self.grid;
        let mut dist = vec![T::neg_infinity(); g.len()];
        dist[dst] = T::zero();
        let start = g.time_index(dst);
        for it in (0..=start).rev() {
            for i in g.layer(it) {
                let di = dist[i];
                if di == T::neg_infinity() {
                    continue;
                }
                self.for_each_in_edge(i, |j, w| {
                    let cand = di + w;
                    if cand > dist[j] {
                        dist[j] = cand;
                    }
                });
            }
        }
        dist
    }

    /// Longest path between two nodes, signed by time order; 0 if unrelated.
    pub fn sigma_graph(&self, x: usize, y: usize) -> T {
        if x == y {
            return T::zero();
        }
        let (tx, ty) = (self.grid.time_index(x), self.grid.time_index(y));
        if tx == ty {
            return T::zero();
        }
        let (a, b, sign) = if ty > tx { (x, y, T::one()) } else { (y, x, -T::one()) };
        let d = self.longest_between(a, b);
        if d == T::neg_infinity() {
            T::zero()
        } else {
            sign * d
        }
    }

    fn longest_between(&self, a: usize, b: usize) -> T {
        let g = self.grid;
        let mut dist = vec![T::neg_infinity(); g.len()];
        dist[a] = T::zero();
        let (ta, tb) = (g.time_index(a), g.time_index(b));
        for it in ta..tb {
            for i in g.layer(it) {
                let di = dist[i];
                if di == T::neg_infinity() {
                    continue;
                }
                self.for_each_out_edge(i, |j, w| {
                    if g.time_index(j) <= tb {
                        let cand = di + w;
                        if cand > dist[j] {
                            dist[j] = cand;
                        }
                    }
                });
            }
        }
        dist[b]
    }

    /// Signed σ from node `src` to all nodes (future positive, past negative).
    pub fn sigma_from_node(&self, src: usize) -> Vec<T> {
        let fut = self.longest_future(src);
        let past = self.longest_past(src);
        fut.iter()
            .zip(&past)
            .map(|(&f, &p)| {
                if f > T::neg_infinity() && f > T::zero() {
                    f
                } else if p > T::neg_infinity() && p > T::zero() {
                    -p
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}

/// A σ-field `σ_x(·)` on a grid.
#[derive(Clone, Debug)]
pub struct SigmaField<T> {
    pub source: Point<T>,
    pub values: Field<T>,
}

/// Computes σ-fields; uses the closed form for constant warps and the
/// stencil DAG otherwise.
#[derive(Debug)]
pub struct SigmaSolver<'g, T> {
    grid: &'g Grid<T>,
    dag: Option<CausalDag<'g, T>>,
}

impl<'g, T: Real> SigmaSolver<'g, T> {
    pub fn new(grid: &'g Grid<T>, radius: usize) -> Result<Self> {
        let dag = if grid.spec().has_constant_warp() { None } else { Some(causal_graph(grid, radius)?) };
        Ok(Self { grid, dag })
    }

    /// Forces the DAG route even for constant warps.
    pub fn graph_only(grid: &'g Grid<T>, radius: usize) -> Result<Self> {
        Ok(Self { grid, dag: Some(causal_graph(grid, radius)?) })
    }

    pub fn grid(&self) -> &'g Grid<T> {
        self.grid
    }

    pub fn field(&self, x: &Point<T>) -> Result<SigmaField<T>> {
        let spec = self.grid.spec();
        if !spec.contains(x) {
            return Err(Error::OutOfRange(format!("source t = {} outside the slab", x.t)));
        }
        let values = match &self.dag {
            None => self.grid.nodes().iter().map(|y| sigma_flat_unchecked(spec, x, y)).collect(),
            Some(dag) => self.graph_field(dag, x),
        };
        Ok(SigmaField { source: *x, values: Field::new(values) })
    }

    /// σ between two arbitrary points: exact for constant warps, otherwise
    /// via the nearest nodes of the DAG.
    pub fn sigma(&self, x: &Point<T>, y: &Point<T>) -> T {
        match &self.dag {
            None => sigma_flat_unchecked(self.grid.spec(), x, y),
            Some(dag) => dag.sigma_graph(self.grid.nearest_node(x), self.grid.nearest_node(y)),
        }
    }

    fn graph_field(&self, dag: &CausalDag<'g, T>, x: &Point<T>) -> Vec<T> {
        let g = self.grid;
        let spec = g.spec();
        let near = g.nearest_node(x);
        let np = g.node(near);
        let on_node = (np.t - x.t).abs() <= T::epsilon() * T::of(8.0) && spec.spatial_distance(&np, x) <= T::epsilon() * T::of(8.0);
        if on_node {
            return dag.sigma_from_node(near);
        }
        // virtual source linked to every node within the stencil box
        let r = T::of_usize(dag.radius());
        let mut fut = vec![T::neg_infinity(); g.len()];
        let mut past = vec![T::neg_infinity(); g.len()];
        for (j, y) in g.nodes().iter().enumerate() {
            let dt = y.t - x.t;
            if dt.abs() > r * g.dt || dt == T::zero() {
                continue;
            }
            let d = spec.min_displacement(x, y);
            if d[0].abs() > r * g.ds[0] || (spec.spatial_dims() == 2 && d[1].abs() > r * g.ds[1]) {
                continue;
            }
            if dt > T::zero() {
                if let Some(w) = chord_proper_time(spec, x.t, dt, d) {
                    fut[j] = w;
                }
            } else if let Some(w) = chord_proper_time(spec, y.t, -dt, d) {
                past[j] = w;
            }
        }
        for it in 0..g.nt {
            for i in g.layer(it) {
                let di = fut[i];
                if di == T::neg_infinity() {
                    continue;
                }
                dag.for_each_out_edge(i, |j, w| {
                    if di + w > fut[j] {
                        fut[j] = di + w;
                    }
                });
            }
        }
        for it in (0..g.nt).rev() {
            for i in g.layer(it) {
                let di = past[i];
                if di == T::neg_infinity() {
                    continue;
                }
                dag.for_each_in_edge(i, |j, w| {
                    if di + w > past[j] {
                        past[j] = di + w;
                    }
                });
            }
        }
        fut.iter()
            .zip(&past)
            .map(|(&f, &p)| {
                if f > T::zero() {
                    f
                } else if p > T::zero() {
                    -p
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// σ-fields for many sources, computed in parallel; output order follows
    /// the input.
    pub fn fields(&self, sources: &[Point<T>]) -> Result<Vec<SigmaField<T>>> {
        sources.par_iter().map(|x| self.field(x)).collect()
    }
}

/// One-shot σ-field with the default radius.
pub fn sigma_field<T: Real>(grid: &Grid<T>, x: &Point<T>) -> Result<SigmaField<T>> {
    SigmaSolver::new(grid, DEFAULT_RADIUS)?.field(x)
}

/// All-pairs σ matrix over the grid nodes (row = source).
pub fn sigma_matrix<T: Real>(solver: &SigmaSolver<'_, T>) -> Result<Vec<Vec<T>>> {
    let fields = solver.fields(solver.grid().nodes())?;
    Ok(fields.into_iter().map(|f| f.values.values).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `y` lies to the future of `x`.
    Future,
    Past,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Identical,
    Chronological(Direction),
    /// Causally but not chronologically related.
    Causal(Direction),
    Unrelated,
}

impl Relation {
    pub fn is_chronological(&self) -> bool {
        matches!(self, Relation::Chronological(_))
    }

    pub fn is_causal(&self) -> bool {
        !matches!(self, Relation::Unrelated)
    }

    pub fn direction(&self) -> Option<Direction> {
        match self {
            Relation::Chronological(d) | Relation::Causal(d) => Some(*d),
            _ => None,
        }
    }

    /// `x ≪ y`.
    pub fn chronological_future(&self) -> bool {
        *self == Relation::Chronological(Direction::Future)
    }

    /// `x ≤ y`, reflexive.
    pub fn causal_future(&self) -> bool {
        matches!(self, Relation::Identical | Relation::Chronological(Direction::Future) | Relation::Causal(Direction::Future))
    }
}

/// Exact causal relation between `x` and `y`.
///
/// The metric is conformal to `−dη² + |ds|²` with `dη = dt/f`, so the
/// relation reduces to comparing the conformal time gap with the flat
/// spatial distance.
pub fn relation<T: Real>(spec: &SpacetimeSpec<T>, x: &Point<T>, y: &Point<T>) -> Relation {
    let d = spec.spatial_distance(x, y);
    if x.t == y.t && d == T::zero() {
        return Relation::Identical;
    }
    let eta = spec.warp.conformal_time(x.t, y.t);
    let dir = if eta > T::zero() { Direction::Future } else { Direction::Past };
    let eta = eta.abs();
    let scale = eta.max(d);
    let gap = eta - d;
    if gap.abs() <= T::cone_tolerance() * scale {
        if eta == T::zero() {
            Relation::Unrelated
        } else {
            Relation::Causal(dir)
        }
    } else if gap > T::zero() {
        Relation::Chronological(dir)
    } else {
        Relation::Unrelated
    }
}

/// Relation between two grid nodes read off the DAG: chronological when
/// `|σ|` exceeds `max(1e−9, half the largest edge weight)`, causal when
/// connected by a path.
pub fn relation_on_dag<T: Real>(dag: &CausalDag<'_, T>, x: usize, y: usize) -> Relation {
    if x == y {
        return Relation::Identical;
    }
    let g = dag.grid();
    let (tx, ty) = (g.time_index(x), g.time_index(y));
    if tx == ty {
        return Relation::Unrelated;
    }
    let (a, b, dir) = if ty > tx { (x, y, Direction::Future) } else { (y, x, Direction::Past) };
    let d = dag.longest_between(a, b);
    if d == T::neg_infinity() {
        return Relation::Unrelated;
    }
    let tol = T::of(1e-9).max(dag.max_edge_weight() * T::half());
    if d > tol {
        Relation::Chronological(dir)
    } else {
        Relation::Causal(dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{grid_build, SpatialFactor, Warp};
    use proptest::prelude::*;

    fn flat() -> SpacetimeSpec<f64> {
        SpacetimeSpec::flat_circle(-1.0, 1.0, 4.0).unwrap()
    }

    #[test]
    fn sigma_flat_examples() {
        let spec = flat();
        let x = spec.pt(0.0, 0.0);
        let y = spec.pt(0.5, 0.3);
        assert!((sigma_flat(&spec, &x, &y).unwrap() - 0.4).abs() < 1e-15);
        assert!((sigma_flat(&spec, &y, &x).unwrap() + 0.4).abs() < 1e-15);
        assert_eq!(sigma_flat(&spec, &x, &spec.pt(0.2, 0.5)).unwrap(), 0.0);
        // winding: s = 3.9 is 0.1 away from 0
        assert!(sigma_flat(&spec, &x, &spec.pt(0.5, 3.9)).unwrap() > 0.48);
    }

    #[test]
    fn sigma_flat_rejects_warp() {
        let spec =
            SpacetimeSpec::new(-1.0, 1.0, SpatialFactor::Circle { circumference: 4.0 }, Warp::polynomial(vec![1.0, 0.0, 1.0]))
                .unwrap();
        let x = spec.pt(0.0, 0.0);
        assert!(matches!(sigma_flat(&spec, &x, &x), Err(Error::NonConstantWarp)));
    }

    #[test]
    fn chord_weight_example() {
        let spec = flat();
        assert!((chord_proper_time(&spec, 0.0, 0.5, [0.3, 0.0]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(chord_proper_time(&spec, 0.0, 0.3, [0.3, 0.0]), Some(0.0));
        assert_eq!(chord_proper_time(&spec, 0.0, 0.2, [0.3, 0.0]), None);
    }

    #[test]
    fn dag_edges_are_causal_and_acyclic() {
        let spec = flat();
        let g = grid_build(&spec, 16, 16).unwrap();
        let dag = causal_graph(&g, 3).unwrap();
        for (i, j, w) in dag.edges() {
            let (p, q) = (g.node(i), g.node(j));
            assert!(q.t > p.t);
            assert!(relation(&spec, &p, &q).causal_future());
            assert!(w >= 0.0);
        }
        for i in g.layer(g.nt - 1) {
            assert_eq!(dag.out_degree(i), 0);
        }
        assert!(causal_graph(&g, 1).is_err());
    }

    #[test]
    fn sigma_graph_near_closed_form() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 2.0).unwrap();
        let g = grid_build(&spec, 100, 100).unwrap();
        let dag = causal_graph(&g, 10).unwrap();
        let x = g.nearest_node(&spec.pt(0.0, 0.0));
        let y = g.nearest_node(&spec.pt(0.5, 0.3));
        let exact = sigma_flat(&spec, &g.node(x), &g.node(y)).unwrap();
        let got = dag.sigma_graph(x, y);
        assert!((got - exact).abs() / exact < 0.02, "{got} vs {exact}");
        assert_eq!(dag.sigma_graph(x, x), 0.0);
        assert!((dag.sigma_graph(y, x) + got).abs() == 0.0);
        let far = g.nearest_node(&spec.pt(0.1, 1.0));
        assert_eq!(dag.sigma_graph(x, far), 0.0);
    }

    #[test]
    fn flat_field_max_is_time_to_boundary() {
        let spec = flat();
        let g = grid_build(&spec, 32, 64).unwrap();
        let f = sigma_field(&g, &spec.pt(0.0, 0.0)).unwrap();
        let max = f.values.values.iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 1.0).abs() <= g.dt);
        // zero outside the double cone
        for (p, v) in g.nodes().iter().zip(&f.values.values) {
            if relation(&spec, &spec.pt(0.0, 0.0), p) == Relation::Unrelated {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn graph_field_matches_single_pair_queries() {
        let spec =
            SpacetimeSpec::new(-1.0, 1.0, SpatialFactor::Circle { circumference: 2.0 }, Warp::polynomial(vec![1.0, 0.0, 0.5]))
                .unwrap();
        let g = grid_build(&spec, 16, 16).unwrap();
        let solver = SigmaSolver::new(&g, 4).unwrap();
        let dag = causal_graph(&g, 4).unwrap();
        let src = 5 * 16 + 3;
        let f = solver.field(&g.node(src)).unwrap();
        for j in 0..g.len() {
            assert_eq!(f.values.values[j], dag.sigma_graph(src, j));
        }
    }

    #[test]
    fn relation_examples() {
        let spec = flat();
        let o = spec.pt(0.0, 0.0);
        assert_eq!(relation(&spec, &o, &spec.pt(0.5, 0.3)), Relation::Chronological(Direction::Future));
        assert_eq!(relation(&spec, &o, &spec.pt(0.3, 0.3)), Relation::Causal(Direction::Future));
        assert_eq!(relation(&spec, &o, &spec.pt(0.1, 0.9)), Relation::Unrelated);
        assert_eq!(relation(&spec, &spec.pt(0.5, 0.3), &o), Relation::Chronological(Direction::Past));
        assert_eq!(relation(&spec, &o, &o), Relation::Identical);
    }

    #[test]
    fn relation_on_dag_agrees_inside_cones() {
        let spec = flat();
        let g = grid_build(&spec, 32, 16).unwrap();
        let dag = causal_graph(&g, 4).unwrap();
        let x = g.nearest_node(&spec.pt(-0.5, 0.0));
        let y = g.nearest_node(&spec.pt(0.5, 0.0));
        assert_eq!(relation_on_dag(&dag, x, y), Relation::Chronological(Direction::Future));
        assert_eq!(relation_on_dag(&dag, y, x), Relation::Chronological(Direction::Past));
        let z = g.nearest_node(&spec.pt(-0.5, 2.0));
        assert_eq!(relation_on_dag(&dag, x, z), Relation::Unrelated);
    }

    #[test]
    fn warped_relation_uses_conformal_time() {
        // f = 2: cones have slope 1/2 in coordinates
        let spec = SpacetimeSpec::new(0.0, 1.0, SpatialFactor::Circle { circumference: 4.0 }, Warp::constant(2.0)).unwrap();
        let o = spec.pt(0.0, 0.0);
        assert_eq!(relation(&spec, &o, &spec.pt(1.0, 0.4)), Relation::Chronological(Direction::Future));
        assert_eq!(relation(&spec, &o, &spec.pt(1.0, 0.5)), Relation::Causal(Direction::Future));
        assert_eq!(relation(&spec, &o, &spec.pt(1.0, 0.6)), Relation::Unrelated);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flat_antisymmetric(t1 in -1.0f64..1.0, s1 in 0.0f64..4.0, t2 in -1.0f64..1.0, s2 in 0.0f64..4.0) {
            let spec = flat();
            let (x, y) = (spec.pt(t1, s1), spec.pt(t2, s2));
            prop_assert_eq!(sigma_flat(&spec, &x, &y).unwrap(), -sigma_flat(&spec, &y, &x).unwrap());
            prop_assert!(sigma_flat(&spec, &x, &y).unwrap().abs() <= 2.0);
        }

        #[test]
        fn graph_reverse_triangle(a in 0usize..256, b in 0usize..256, c in 0usize..256) {
            let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 2.0).unwrap();
            let g = grid_build(&spec, 16, 16).unwrap();
            let dag = causal_graph(&g, 3).unwrap();
            let mut ids = [a, b, c];
            ids.sort_by_key(|&i| g.time_index(i));
            let [x, y, z] = ids;
            let (xy, yz, xz) = (dag.sigma_graph(x, y), dag.sigma_graph(y, z), dag.sigma_graph(x, z));
            if xy > 0.0 && yz > 0.0 {
                prop_assert!(xz >= xy + yz - 1e-12);
            }
        }
    }
}
